#include "ringflow/sdp/lyapunov.hpp"

#include <Eigen/Eigenvalues>

#include "ringflow/errors.hpp"

namespace ringflow::sdp {

Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& M,
                               const Eigen::MatrixXd& W) {
  const int d = static_cast<int>(M.rows());
  if (M.cols() != d || W.rows() != d || W.cols() != d) {
    throw ValidationError("lyapunov_solve needs square matrices of one size");
  }
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(M);
  if (schur.info() != Eigen::Success) {
    throw NumericalFailureError("Schur decomposition failed");
  }
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  for (int i = 0; i < d; ++i) {
    if (T(i, i).real() >= 0.0) {
      throw SpectrumError("lyapunov_solve requires a Hurwitz matrix");
    }
  }

  // T Y + Y T^* = -U^* W U, solved column by column from the right.
  const Eigen::MatrixXcd C = U.adjoint() * W * U;
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(d, d);
  for (int j = d - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = -C.col(j);
    for (int k = j + 1; k < d; ++k) {
      rhs -= std::conj(T(j, k)) * Y.col(k);
    }
    Eigen::MatrixXcd A = T;
    A.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = A.triangularView<Eigen::Upper>().solve(rhs);
  }
  Eigen::MatrixXd P = (U * Y * U.adjoint()).real();
  return 0.5 * (P + P.transpose());
}

}  // namespace ringflow::sdp
