#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ringflow/car_following.hpp"

namespace ringflow {

// Vehicle indexing convention used by every module: vehicles are numbered
// 1..n with vehicle 1 the CAV; vehicle i-1 is immediately ahead of vehicle i
// and vehicle n is ahead of vehicle 1 (s_i = p_{i-1} - p_i on the ring).
// In code the indices are 0-based: vehicle 0 is the CAV, ahead_of(i) =
// (i + n - 1) % n. The global error state is x = (s~_1, v~_1, ..., s~_n,
// v~_n), so vehicle i (0-based) owns state rows 2i (spacing) and 2i+1
// (velocity).

/// Assembled linear model of the mixed ring plus its equilibrium data.
struct RingModel {
  int n = 0;            // vehicle count (1 CAV + n-1 HDVs)
  double length = 0.0;  // ring circumference L [m]
  double v_star = 0.0;  // equilibrium speed [m/s]
  Eigen::VectorXd s_star;              // per-vehicle equilibrium spacing [m]
  Eigen::MatrixXd A;                   // 2n x 2n
  Eigen::VectorXd B;                   // 2n x 1, single 1 at the CAV velocity
  Eigen::MatrixXd H;                   // 2n x n disturbance map
  std::vector<LinearHdvCoeffs> hdv_coeffs;  // vehicles 2..n

  int state_dim() const { return 2 * n; }
  double s_star_cav() const { return s_star(0); }
};

/// Per-vehicle equilibrium state for a prescribed ring speed.
struct EquilibriumState {
  double v_star = 0.0;
  double s_star_cav = 0.0;               // from the ring-length constraint
  std::vector<double> s_star_hdv;        // vehicles 2..n, from F_i(s,0,v*)=0
};

/// Builds A, B, H from linearized HDV coefficients (vehicles 2..n) and the
/// per-HDV equilibrium spacings. The CAV equilibrium spacing is whatever the
/// ring length leaves over; throws InfeasibleEquilibriumError when that is
/// not positive.
RingModel assemble_ring_model(const std::vector<LinearHdvCoeffs>& hdv_coeffs,
                              const std::vector<double>& s_star_hdv,
                              double v_star, double length);

/// Linearizes each HDV law at v_star and assembles the ring model.
RingModel build_ring_model(
    const std::vector<const CarFollowingLaw*>& hdv_laws, double v_star,
    double length);

/// Equilibrium layout for given HDV laws (index k = vehicle k+2).
EquilibriumState ring_equilibrium(
    const std::vector<const CarFollowingLaw*>& hdv_laws, double v_star,
    double length);

/// Left annihilator of the ring dynamics: (1,0,1,0,...,1,0)^T.
Eigen::VectorXd spacing_sum_vector(int n);

/// Uniform jitter applied around a base parameter set, one independent draw
/// per vehicle in the order alpha, beta, s_go.
struct FleetDistribution {
  OvmParams base;
  double alpha_jitter = 0.0;
  double beta_jitter = 0.0;
  double s_go_jitter = 0.0;
};

/// Samples n parameter sets (index 0 = CAV, used only when it drives
/// manually). Reproducible bit-for-bit for a given seed.
std::vector<OvmParams> sample_fleet(const FleetDistribution& dist, int n,
                                    std::uint64_t seed);

/// Largest speed v such that the HDV equilibrium spacings still fit on the
/// ring: solves sum_i E_i(v) = L by bisection (tolerance in m/s). When even
/// free-flow spacings fit, returns the smallest per-vehicle speed cap.
double max_reachable_velocity(
    const std::vector<const CarFollowingLaw*>& hdv_laws, double length,
    double tol = 1e-8);

}  // namespace ringflow
