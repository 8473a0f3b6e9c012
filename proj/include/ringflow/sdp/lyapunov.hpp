#pragma once

#include <Eigen/Dense>

namespace ringflow::sdp {

/// Solves M P + P M' + W = 0 for symmetric P, requiring M Hurwitz (throws
/// SpectrumError otherwise). Bartels-Stewart on the complex Schur form.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& M,
                               const Eigen::MatrixXd& W);

}  // namespace ringflow::sdp
