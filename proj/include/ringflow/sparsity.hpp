#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ringflow/errors.hpp"

namespace ringflow {

/// Communication-topology-induced sparsity data for the 1 x 2n gain: the
/// per-vehicle block mask over K, the row pattern T imposed on Z, and the
/// symmetric pattern S* imposed on X so that Z X^{-1} lands in the mask.
struct SparsityPattern {
  int n = 0;                 // vehicles
  Eigen::VectorXi mask;      // 2n, 1 = entry may be nonzero
  Eigen::VectorXi T;         // 2n, same pattern as mask
  Eigen::MatrixXi S_star;    // 2n x 2n symmetric, unit diagonal

  bool is_full() const { return mask.minCoeff() == 1; }
};

/// Two-step construction of the largest symmetric pattern S* compatible
/// with a given row pattern T (any number of rows): first zero S_ij when
/// some row sees i but not j, then symmetrize by logical AND.
Eigen::MatrixXi sparsity_invariant_pattern(const Eigen::MatrixXi& T);

/// Builds the pattern for a communication set given as 1-based vehicle
/// indices; vehicle 1 (the CAV itself) must be present.
SparsityPattern topology_to_pattern(const std::vector<int>& visible_vehicles,
                                    int n);

/// The paper-style neighborhood: the CAV plus `ahead` vehicles in front and
/// `behind` vehicles behind it on the ring, as 1-based indices.
std::vector<int> neighborhood_topology(int n, int ahead, int behind);

/// Groups the 2n state columns into connected components of S*.
std::vector<std::vector<int>> pattern_components(const Eigen::MatrixXi& S_star);

/// Largest |K_j| over masked-out entries (0 for an exactly structured gain).
double max_masked_magnitude(const Eigen::RowVectorXd& K,
                            const Eigen::VectorXi& mask);

}  // namespace ringflow
