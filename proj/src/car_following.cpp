#include "ringflow/car_following.hpp"

#include <cmath>

namespace ringflow {

void OvmParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(v_max > 0.0)) {
    throw ValidationError("OVM parameters require alpha, beta, v_max > 0");
  }
  if (!(s_st < s_go)) {
    throw ValidationError("OVM parameters require s_st < s_go");
  }
}

void LinearHdvCoeffs::validate() const {
  if (!(a1 > 0.0) || !(a2 > a3) || !(a3 > 0.0)) {
    throw ValidationError(
        "linearized coefficients must satisfy a1 > 0 and a2 > a3 > 0");
  }
}

double CarFollowingLaw::equilibrium_spacing(double v_star) const {
  if (v_star < 0.0 || v_star > max_equilibrium_speed()) {
    throw DomainError("equilibrium speed outside [0, v_max]");
  }
  auto [lo, hi] = spacing_bracket();
  // F(s, 0, v*) is nondecreasing in s; bisect to 1e-10 m.
  double flo = accel(lo, 0.0, v_star);
  double fhi = accel(hi, 0.0, v_star);
  if (flo > 0.0) return lo;
  if (fhi < 0.0) return hi;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (accel(mid, 0.0, v_star) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::array<double, 3> CarFollowingLaw::partials(double s, double sdot,
                                                double v) const {
  const double h = 1e-6;
  return {(accel(s + h, sdot, v) - accel(s - h, sdot, v)) / (2 * h),
          (accel(s, sdot + h, v) - accel(s, sdot - h, v)) / (2 * h),
          (accel(s, sdot, v + h) - accel(s, sdot, v - h)) / (2 * h)};
}

OptimalVelocityLaw::OptimalVelocityLaw(const OvmParams& p) : p_(p) {
  p_.validate();
}

double OptimalVelocityLaw::desired_velocity(double s) const {
  if (s <= p_.s_st) return 0.0;
  if (s >= p_.s_go) return p_.v_max;
  const double phase = M_PI * (s - p_.s_st) / (p_.s_go - p_.s_st);
  return 0.5 * p_.v_max * (1.0 - std::cos(phase));
}

double OptimalVelocityLaw::desired_velocity_slope(double s) const {
  if (s <= p_.s_st || s >= p_.s_go) return 0.0;
  const double w = M_PI / (p_.s_go - p_.s_st);
  return 0.5 * p_.v_max * w * std::sin(w * (s - p_.s_st));
}

double OptimalVelocityLaw::accel(double s, double sdot, double v) const {
  return p_.alpha * (desired_velocity(s) - v) + p_.beta * sdot;
}

std::pair<double, double> OptimalVelocityLaw::spacing_bracket() const {
  return {p_.s_st, p_.s_go};
}

double OptimalVelocityLaw::equilibrium_spacing(double v_star) const {
  if (v_star < 0.0 || v_star > p_.v_max) {
    throw DomainError("equilibrium speed outside [0, v_max]");
  }
  // Invert the raised-cosine profile.
  const double c = 1.0 - 2.0 * v_star / p_.v_max;
  return p_.s_st + (p_.s_go - p_.s_st) / M_PI * std::acos(c);
}

std::array<double, 3> OptimalVelocityLaw::partials(double s, double /*sdot*/,
                                                   double /*v*/) const {
  return {p_.alpha * desired_velocity_slope(s), p_.beta, -p_.alpha};
}

double ovm_acceleration(const OvmParams& p, double s, double sdot, double v) {
  return OptimalVelocityLaw(p).accel(s, sdot, v);
}

double ovm_equilibrium_spacing(const OvmParams& p, double v_star) {
  return OptimalVelocityLaw(p).equilibrium_spacing(v_star);
}

LinearHdvCoeffs linearize_hdv(const CarFollowingLaw& law, double v_star) {
  const double s_star = law.equilibrium_spacing(v_star);
  const auto d = law.partials(s_star, 0.0, v_star);
  LinearHdvCoeffs c{d[0], d[1] - d[2], d[1]};
  if (!(c.a1 > 1e-12)) {
    throw DegenerateLinearizationError(
        "spacing sensitivity vanishes at this equilibrium (a1 = 0)");
  }
  c.validate();
  return c;
}

LinearHdvCoeffs linearize_hdv(const OvmParams& p, double v_star) {
  return linearize_hdv(OptimalVelocityLaw(p), v_star);
}

}  // namespace ringflow
