#include "ringflow/sdp/program.hpp"

#include <cmath>

namespace ringflow::sdp {

Eigen::VectorXd svec(const Eigen::MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  if (A.cols() != d) throw ValidationError("svec needs a square matrix");
  Eigen::VectorXd v(d * (d + 1) / 2);
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      v(k++) = (i == j) ? A(i, j) : r2 * 0.5 * (A(i, j) + A(j, i));
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int len = static_cast<int>(v.size());
  const int d = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0);
  if (d * (d + 1) / 2 != len) {
    throw ValidationError("smat input length is not triangular");
  }
  Eigen::MatrixXd A(d, d);
  const double inv_r2 = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double x = v(k++);
      if (i == j) {
        A(i, i) = x;
      } else {
        A(i, j) = A(j, i) = x * inv_r2;
      }
    }
  }
  return A;
}

int ConicProgram::add_scalar() {
  objective_.push_back(0.0);
  return num_slots_++;
}

MatVar ConicProgram::add_symmetric(int dim) {
  if (dim <= 0) throw ValidationError("matrix variable needs positive dim");
  MatVar v{dim, num_slots_};
  const int count = dim * (dim + 1) / 2;
  num_slots_ += count;
  objective_.resize(num_slots_, 0.0);
  return v;
}

int ConicProgram::slot(const MatVar& v, int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= v.dim) throw ValidationError("matrix entry out of range");
  // Row-major upper triangle offset.
  return v.base_slot + i * v.dim - i * (i - 1) / 2 + (j - i);
}

void ConicProgram::check_slot(int slot) const {
  if (slot < 0 || slot >= num_slots_) {
    throw ValidationError("reference to an undeclared variable slot");
  }
}

void ConicProgram::add_objective(int slot, double coeff) {
  check_slot(slot);
  objective_[slot] += coeff;
}

int ConicProgram::add_equality(double rhs) {
  equalities_.push_back(EqRow{{}, rhs});
  return static_cast<int>(equalities_.size()) - 1;
}

void ConicProgram::add_eq_coeff(int eq, int slot, double coeff) {
  check_slot(slot);
  equalities_.at(eq).terms.emplace_back(slot, coeff);
}

int ConicProgram::add_psd_block(int dim) {
  if (dim <= 0) throw ValidationError("PSD block needs positive dim");
  blocks_.push_back(Block{dim, {}, {}});
  return static_cast<int>(blocks_.size()) - 1;
}

void ConicProgram::add_f0(int block, int i, int j, double value) {
  auto& b = blocks_.at(block);
  if (i < 0 || j < 0 || i >= b.dim || j >= b.dim) {
    throw ValidationError("F0 entry out of range");
  }
  b.f0.push_back(Entry{-1, i, j, value});
}

void ConicProgram::add_coeff(int block, int slot, int i, int j, double value) {
  check_slot(slot);
  auto& b = blocks_.at(block);
  if (i < 0 || j < 0 || i >= b.dim || j >= b.dim) {
    throw ValidationError("coefficient entry out of range");
  }
  b.coeffs.push_back(Entry{slot, i, j, value});
}

void ConicProgram::prune_trivial_equalities() {
  std::vector<EqRow> kept;
  for (auto& row : equalities_) {
    double norm = 0.0;
    for (const auto& [slot, c] : row.terms) norm += std::abs(c);
    if (norm > 0.0) {
      kept.push_back(std::move(row));
    } else if (std::abs(row.rhs) > 0.0) {
      throw ValidationError("equality row 0 = rhs with rhs != 0");
    }
  }
  equalities_ = std::move(kept);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

Eigen::MatrixXd SolveOutcome::matrix(const MatVar& v) const {
  Eigen::MatrixXd M(v.dim, v.dim);
  int k = v.base_slot;
  for (int i = 0; i < v.dim; ++i) {
    for (int j = i; j < v.dim; ++j) {
      M(i, j) = M(j, i) = y(k++);
    }
  }
  return M;
}

}  // namespace ringflow::sdp
