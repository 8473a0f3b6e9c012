#include "ringflow/ring_model.hpp"

#include <numeric>

#include "ringflow/rng.hpp"

namespace ringflow {

RingModel assemble_ring_model(const std::vector<LinearHdvCoeffs>& hdv_coeffs,
                              const std::vector<double>& s_star_hdv,
                              double v_star, double length) {
  const int n = static_cast<int>(hdv_coeffs.size()) + 1;
  if (n < 2) throw ValidationError("ring model needs at least 2 vehicles");
  if (s_star_hdv.size() != hdv_coeffs.size()) {
    throw ValidationError("one equilibrium spacing required per HDV");
  }
  for (const auto& c : hdv_coeffs) c.validate();

  const double hdv_total =
      std::accumulate(s_star_hdv.begin(), s_star_hdv.end(), 0.0);
  const double s1 = length - hdv_total;
  if (!(s1 > 0.0)) {
    throw InfeasibleEquilibriumError(
        "HDV equilibrium spacings leave no room for the CAV (s1* <= 0)");
  }

  RingModel m;
  m.n = n;
  m.length = length;
  m.v_star = v_star;
  m.hdv_coeffs = hdv_coeffs;
  m.s_star.resize(n);
  m.s_star(0) = s1;
  for (int i = 1; i < n; ++i) m.s_star(i) = s_star_hdv[i - 1];

  const int d = 2 * n;
  m.A = Eigen::MatrixXd::Zero(d, d);
  m.B = Eigen::VectorXd::Zero(d);
  m.H = Eigen::MatrixXd::Zero(d, n);

  for (int i = 0; i < n; ++i) {
    const int ahead = (i + n - 1) % n;
    // Spacing row: s~_i' = v~_{i-1} - v~_i.
    m.A(2 * i, 2 * ahead + 1) += 1.0;
    m.A(2 * i, 2 * i + 1) -= 1.0;
    // Velocity row: HDVs follow the linearized law, the CAV row carries the
    // input instead.
    if (i > 0) {
      const auto& c = hdv_coeffs[i - 1];
      m.A(2 * i + 1, 2 * i) = c.a1;
      m.A(2 * i + 1, 2 * i + 1) = -c.a2;
      m.A(2 * i + 1, 2 * ahead + 1) += c.a3;
    }
    m.H(2 * i + 1, i) = 1.0;
  }
  m.B(1) = 1.0;
  return m;
}

EquilibriumState ring_equilibrium(
    const std::vector<const CarFollowingLaw*>& hdv_laws, double v_star,
    double length) {
  EquilibriumState eq;
  eq.v_star = v_star;
  eq.s_star_hdv.reserve(hdv_laws.size());
  double total = 0.0;
  for (const auto* law : hdv_laws) {
    const double s = law->equilibrium_spacing(v_star);
    eq.s_star_hdv.push_back(s);
    total += s;
  }
  eq.s_star_cav = length - total;
  return eq;
}

RingModel build_ring_model(
    const std::vector<const CarFollowingLaw*>& hdv_laws, double v_star,
    double length) {
  const EquilibriumState eq = ring_equilibrium(hdv_laws, v_star, length);
  std::vector<LinearHdvCoeffs> coeffs;
  coeffs.reserve(hdv_laws.size());
  for (const auto* law : hdv_laws) {
    coeffs.push_back(linearize_hdv(*law, v_star));
  }
  return assemble_ring_model(coeffs, eq.s_star_hdv, v_star, length);
}

Eigen::VectorXd spacing_sum_vector(int n) {
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < n; ++i) rho(2 * i) = 1.0;
  return rho;
}

std::vector<OvmParams> sample_fleet(const FleetDistribution& dist, int n,
                                    std::uint64_t seed) {
  dist.base.validate();
  Rng rng(seed);
  std::vector<OvmParams> fleet;
  fleet.reserve(n);
  for (int i = 0; i < n; ++i) {
    OvmParams p = dist.base;
    p.alpha += rng.uniform(-dist.alpha_jitter, dist.alpha_jitter);
    p.beta += rng.uniform(-dist.beta_jitter, dist.beta_jitter);
    p.s_go += rng.uniform(-dist.s_go_jitter, dist.s_go_jitter);
    p.validate();
    fleet.push_back(p);
  }
  return fleet;
}

double max_reachable_velocity(
    const std::vector<const CarFollowingLaw*>& hdv_laws, double length,
    double tol) {
  if (hdv_laws.empty()) throw ValidationError("no HDV laws given");
  double v_up = hdv_laws.front()->max_equilibrium_speed();
  for (const auto* law : hdv_laws) {
    v_up = std::min(v_up, law->max_equilibrium_speed());
  }
  const auto occupied = [&](double v) {
    double total = 0.0;
    for (const auto* law : hdv_laws) total += law->equilibrium_spacing(v);
    return total;
  };
  if (occupied(0.0) >= length) {
    throw InfeasibleEquilibriumError(
        "standstill spacings already exceed the ring length");
  }
  if (occupied(v_up) <= length) return v_up;
  double lo = 0.0, hi = v_up;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (occupied(mid) < length) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ringflow
