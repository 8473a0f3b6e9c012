#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ringflow/ring_model.hpp"
#include "ringflow/sdp/program.hpp"
#include "ringflow/sparsity.hpp"

namespace ringflow {

/// Penalties on the performance output: spacing error, velocity error and
/// control effort. Optional per-vehicle overrides replace the uniform
/// spacing/velocity weights.
struct PerformanceWeights {
  double gamma_s = 0.03;
  double gamma_v = 0.15;
  double gamma_u = 1.0;
  std::vector<double> gamma_s_per_vehicle;  // empty = uniform
  std::vector<double> gamma_v_per_vehicle;

  void validate(int n) const;
};

/// State penalty Q = diag(gamma_s^2, gamma_v^2, ...) and input penalty
/// R = gamma_u^2 (the squares of the square-root weights in the output).
std::pair<Eigen::MatrixXd, double> build_performance(
    const PerformanceWeights& w, int n);

struct SynthesisOptions {
  double eps_pd = 1e-6;     // X >= eps_pd I
  double eps_lmi = 1e-6;    // Lyapunov LMI margin on the complement of rho_0
  double eps_schur = 1e-8;  // interior margin on the [[Y, Z],[Z', X]] block;
                            // at the optimum that block is otherwise exactly
                            // singular, which starves the interior point of
                            // conditioning right at convergence
  sdp::SolverOptions solver;

  SynthesisOptions() {
    // Gap drives the certificate quality; feasibility residuals of 1e-7 are
    // immaterial next to the 1e-6 LMI margins and avoid endgame stalls.
    solver.feas_tol = 1e-7;
    solver.gap_tol = 1e-8;
  }
};

struct SynthesisResult {
  Eigen::RowVectorXd K;   // 1 x 2n structured gain
  Eigen::MatrixXd X;      // Lyapunov certificate, PD
  double Y = 0.0;         // input-energy bound block
  Eigen::RowVectorXd Z;   // K X
  double certified_cost = 0.0;  // Tr(QX) + R Y, upper bound on ||G||^2
  bool structured = false;
  SparsityPattern pattern;
  double solver_rel_gap = 0.0;
  int solver_iterations = 0;
};

/// Solves the sparsity-invariance relaxation of the structured H2 problem
/// and recovers K = Z X^{-1}. Throws StructuredInfeasibleError when the
/// relaxation is infeasible (it is sufficient, not complete) and
/// NumericalFailureError when the solver cannot close the gap.
SynthesisResult solve_structured_h2(const RingModel& m,
                                    const PerformanceWeights& w,
                                    const SparsityPattern& pattern,
                                    const SynthesisOptions& opts = {});

/// Closed-loop matrix A - B K.
Eigen::MatrixXd closed_loop(const RingModel& m, const Eigen::RowVectorXd& K);

/// Performance output matrix [Q^{1/2}; -R^{1/2} K].
Eigen::MatrixXd output_matrix(const Eigen::MatrixXd& Q, double R,
                              const Eigen::RowVectorXd& K);

/// H2 norm of the transfer from the disturbance channels H to the output
/// C x. Accepts either a Hurwitz A_cl or the mixed-traffic structural case:
/// a simple zero eigenvalue whose left null vector annihilates H; that mode
/// is deflated before the Lyapunov solve. Anything else throws
/// UnboundedNormError.
double h2_norm(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& H,
               const Eigen::MatrixXd& C, double zero_tol = 1e-7);

}  // namespace ringflow
