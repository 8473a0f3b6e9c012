#include "ringflow/sparsity.hpp"

#include <algorithm>

namespace ringflow {

Eigen::MatrixXi sparsity_invariant_pattern(const Eigen::MatrixXi& T) {
  const int rows = static_cast<int>(T.rows());
  const int cols = static_cast<int>(T.cols());
  Eigen::MatrixXi S = Eigen::MatrixXi::Ones(cols, cols);
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (int k = 0; k < rows; ++k) {
        if (T(k, j) == 0 && T(k, i) == 1) {
          S(i, j) = 0;
          break;
        }
      }
    }
  }
  // Symmetrize by logical AND.
  Eigen::MatrixXi S_star(cols, cols);
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < cols; ++j) {
      S_star(i, j) = (S(i, j) == 1 && S(j, i) == 1) ? 1 : 0;
    }
  }
  return S_star;
}

SparsityPattern topology_to_pattern(const std::vector<int>& visible_vehicles,
                                    int n) {
  if (n < 1) throw ValidationError("pattern needs at least one vehicle");
  SparsityPattern pat;
  pat.n = n;
  pat.mask = Eigen::VectorXi::Zero(2 * n);
  bool sees_self = false;
  for (int v : visible_vehicles) {
    if (v < 1 || v > n) {
      throw TopologyError("vehicle index outside 1..n in communication set");
    }
    if (v == 1) sees_self = true;
    pat.mask(2 * (v - 1)) = 1;
    pat.mask(2 * (v - 1) + 1) = 1;
  }
  if (!sees_self) {
    throw TopologyError("the CAV must have access to its own state");
  }
  pat.T = pat.mask;
  pat.S_star = sparsity_invariant_pattern(pat.T.transpose());
  return pat;
}

std::vector<int> neighborhood_topology(int n, int ahead, int behind) {
  if (ahead < 0 || behind < 0) {
    throw TopologyError("neighborhood sizes must be nonnegative");
  }
  if (ahead + behind + 1 >= n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i + 1;
    return all;
  }
  std::vector<int> ecf{1};
  // Vehicle i-1 is ahead of vehicle i, so the vehicles ahead of the CAV are
  // n, n-1, ... and the ones behind are 2, 3, ...
  for (int k = 0; k < ahead; ++k) ecf.push_back(n - k);
  for (int k = 0; k < behind; ++k) ecf.push_back(2 + k);
  std::sort(ecf.begin(), ecf.end());
  return ecf;
}

std::vector<std::vector<int>> pattern_components(
    const Eigen::MatrixXi& S_star) {
  const int d = static_cast<int>(S_star.rows());
  std::vector<int> comp(d, -1);
  std::vector<std::vector<int>> groups;
  for (int seed = 0; seed < d; ++seed) {
    if (comp[seed] >= 0) continue;
    const int id = static_cast<int>(groups.size());
    groups.emplace_back();
    std::vector<int> stack{seed};
    comp[seed] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      groups[id].push_back(u);
      for (int v = 0; v < d; ++v) {
        if (comp[v] < 0 && (S_star(u, v) == 1 || S_star(v, u) == 1)) {
          comp[v] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(groups[id].begin(), groups[id].end());
  }
  return groups;
}

double max_masked_magnitude(const Eigen::RowVectorXd& K,
                            const Eigen::VectorXi& mask) {
  double worst = 0.0;
  for (int j = 0; j < K.size(); ++j) {
    if (mask(j) == 0) worst = std::max(worst, std::abs(K(j)));
  }
  return worst;
}

}  // namespace ringflow
