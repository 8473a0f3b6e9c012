#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ringflow/errors.hpp"

namespace ringflow::sdp {

/// Handle to a symmetric matrix decision variable. Entries live in the
/// program's flat slot vector, upper triangle in row-major order.
struct MatVar {
  int dim = 0;
  int base_slot = -1;
};

/// Scaled upper-triangle vectorization: off-diagonal entries carry sqrt(2)
/// so that svec(A) . svec(B) = <A, B>. Used wherever a symmetric matrix is
/// handed around as a flat vector.
Eigen::VectorXd svec(const Eigen::MatrixXd& A);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

/// A linear conic program over scalar and symmetric-matrix variables:
///
///   minimize    b' y
///   subject to  G y = g
///               F_0^k + sum_i y_i F_i^k  is PSD   for each block k,
///
/// where y stacks every declared variable entry. Symmetric variables store
/// the upper triangle; a coefficient added at (i, j), i != j, acts on both
/// halves of the block expression.
class ConicProgram {
 public:
  int add_scalar();
  MatVar add_symmetric(int dim);
  /// Flat slot of entry (i, j) of a matrix variable (order-insensitive).
  int slot(const MatVar& v, int i, int j) const;
  int num_slots() const { return num_slots_; }

  void add_objective(int slot, double coeff);

  int add_equality(double rhs);
  void add_eq_coeff(int eq, int slot, double coeff);

  int add_psd_block(int dim);
  int num_psd_blocks() const { return static_cast<int>(blocks_.size()); }
  /// Accumulates into the constant term F_0 (symmetrically for i != j).
  void add_f0(int block, int i, int j, double value);
  /// Accumulates the coefficient of a variable slot at position (i, j).
  void add_coeff(int block, int slot, int i, int j, double value);

  /// Drops equality rows with no surviving coefficients.
  void prune_trivial_equalities();

  // --- plain data, read by the solver ---
  struct Entry {
    int slot;
    int i;
    int j;
    double value;
  };
  struct Block {
    int dim = 0;
    std::vector<Entry> f0;
    std::vector<Entry> coeffs;
  };
  struct EqRow {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
  };

  const std::vector<double>& objective() const { return objective_; }
  const std::vector<EqRow>& equalities() const { return equalities_; }
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  void check_slot(int slot) const;

  int num_slots_ = 0;
  std::vector<double> objective_;
  std::vector<EqRow> equalities_;
  std::vector<Block> blocks_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd y;          // primal point (all variable slots)
  double objective = 0.0;     // b' y
  double dual_objective = 0.0;
  double gap = 0.0;           // complementarity <S, W> summed over blocks
  double rel_gap = 0.0;
  double max_psd_violation = 0.0;  // max(0, -lambda_min(F(y))) over blocks
  double max_eq_violation = 0.0;
  int iterations = 0;
  std::string message;

  double scalar(int slot) const { return y(slot); }
  Eigen::MatrixXd matrix(const MatVar& v) const;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iters = 120;
  bool verbose = false;
  bool parallel = true;  // Schur-complement assembly kernel
};

}  // namespace ringflow::sdp
