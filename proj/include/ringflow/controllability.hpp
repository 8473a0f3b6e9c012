#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ringflow/ring_model.hpp"

namespace ringflow {

/// One rank-deficient eigenvalue of the PBH pencil together with a unit left
/// null vector of [lambda I - A, B].
struct UncontrollableMode {
  std::complex<double> eigenvalue;
  Eigen::VectorXcd left_vector;
};

struct PbhReport {
  Eigen::VectorXcd eigenvalues;  // spectrum of A_hat
  std::vector<UncontrollableMode> uncontrollable_modes;
  bool is_controllable = false;
  bool is_stabilizable = false;
  /// Algebraic multiplicity of the zero eigenvalue of A_hat.
  int zero_mode_multiplicity = 0;
  int dim_ker = 0;       // dim ker(A_hat)
  int dim_ker_sq = 0;    // dim ker(A_hat^2)
  bool condition_14 = false;  // stabilizability condition on the coefficients
};

struct PbhOptions {
  double rank_tol = 1e-8;     // singular values below rank_tol * sigma_max
  double cluster_tol = 1e-7;  // eigenvalues closer than this count as one
};

/// Fictitious CAV coefficients used to close the ring into an all-HDV
/// system: the mean of the HDV coefficients. Any positive triple works; the
/// analysis outcome does not depend on the choice.
LinearHdvCoeffs default_cav_coeffs(const RingModel& m);

/// Replaces the CAV input row with a human-like row built from cav_coeffs,
/// producing the block-circulant all-HDV matrix whose spectrum carries the
/// controllability structure of (A, B).
Eigen::MatrixXd transform_to_hat(const RingModel& m,
                                 const LinearHdvCoeffs& cav_coeffs);

/// Eigenvalues of A at which [lambda I - A, B] loses row rank, clustered so
/// that defective groups are tested once.
std::vector<std::complex<double>> uncontrollable_eigenvalues(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
    const PbhOptions& opt = {});

/// Full PBH report for the mixed ring: uncontrollable modes, Jordan
/// structure of the zero eigenvalue, and the stabilizability verdict.
PbhReport pbh_analysis(const RingModel& m, const LinearHdvCoeffs& cav_coeffs,
                       double rank_tol = 1e-8);

/// Closed-form sufficient condition for stabilizability over every ordered
/// coefficient pair: a_j1^2 - a_i2 a_j1 a_j3 + a_i1 a_j3^2 != 0.
bool check_stabilizability_condition(
    const std::vector<LinearHdvCoeffs>& all_coeffs, double rel_tol = 1e-12);

/// Non-degeneracy of a nonzero eigenvalue: lambda^2 + a_i2 lambda + a_i1 and
/// a_i3 lambda + a_i2 stay away from zero for every vehicle.
bool verify_eigenvalue_condition(
    const std::vector<LinearHdvCoeffs>& all_coeffs,
    std::complex<double> lambda, double abs_tol = 1e-10);

/// Numerical rank of [B, AB, ..., A^{d-1}B]; only sensible at small sizes.
int kalman_controllability_rank(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& B,
                                double rank_tol = 1e-8);

/// Numerical rank via singular values with threshold tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& M, double tol);

}  // namespace ringflow
