#pragma once

#include <array>
#include <memory>
#include <utility>

#include "ringflow/errors.hpp"

namespace ringflow {

/// Optimal-velocity-model parameters for one driver.
struct OvmParams {
  double alpha = 0.6;   // desired-velocity relaxation gain [1/s]
  double beta = 0.9;    // relative-velocity gain [1/s]
  double v_max = 30.0;  // free-flow speed [m/s]
  double s_st = 5.0;    // standstill spacing [m]
  double s_go = 35.0;   // free-flow spacing [m]

  void validate() const;
};

/// Linearized car-following coefficients around an equilibrium,
/// with a1 = dF/ds, a2 = dF/dsdot - dF/dv, a3 = dF/dsdot.
struct LinearHdvCoeffs {
  double a1 = 0.0;  // [1/s^2]
  double a2 = 0.0;  // [1/s]
  double a3 = 0.0;  // [1/s]

  void validate() const;  // requires a1 > 0 and a2 > a3 > 0
};

/// A car-following acceleration law F(s, sdot, v) with the hooks needed by
/// the rest of the toolkit: equilibria and partial derivatives. Alternative
/// laws only have to supply accel(); the base class falls back to bisection
/// for equilibria (assuming F(s,0,v) is nondecreasing in s) and to central
/// finite differences for the partials.
class CarFollowingLaw {
 public:
  virtual ~CarFollowingLaw() = default;

  virtual double accel(double s, double sdot, double v) const = 0;

  /// Spacing range [lo, hi] bracketing every equilibrium spacing.
  virtual std::pair<double, double> spacing_bracket() const = 0;

  /// Largest speed that admits an equilibrium spacing.
  virtual double max_equilibrium_speed() const = 0;

  /// Solves F(s*, 0, v*) = 0 for s*. Throws DomainError when v* is outside
  /// [0, max_equilibrium_speed()].
  virtual double equilibrium_spacing(double v_star) const;

  /// (dF/ds, dF/dsdot, dF/dv) at the given state.
  virtual std::array<double, 3> partials(double s, double sdot,
                                         double v) const;
};

/// Nonlinear OVM: F = alpha * (V(s) - v) + beta * sdot, where V is zero up
/// to s_st, saturates at v_max beyond s_go, and follows a raised-cosine
/// profile in between.
class OptimalVelocityLaw final : public CarFollowingLaw {
 public:
  explicit OptimalVelocityLaw(const OvmParams& p);

  double accel(double s, double sdot, double v) const override;
  std::pair<double, double> spacing_bracket() const override;
  double max_equilibrium_speed() const override { return p_.v_max; }
  double equilibrium_spacing(double v_star) const override;  // closed form
  std::array<double, 3> partials(double s, double sdot, double v) const
      override;  // analytic

  double desired_velocity(double s) const;
  double desired_velocity_slope(double s) const;
  const OvmParams& params() const { return p_; }

 private:
  OvmParams p_;
};

/// Free-function form used throughout the tests and the simulator.
double ovm_acceleration(const OvmParams& p, double s, double sdot, double v);

/// Closed-form inverse of the OVM desired-velocity profile.
double ovm_equilibrium_spacing(const OvmParams& p, double v_star);

/// Linearizes a law at (s*(v*), 0, v*). Throws DegenerateLinearizationError
/// when the spacing sensitivity vanishes (equilibrium at a profile boundary).
LinearHdvCoeffs linearize_hdv(const CarFollowingLaw& law, double v_star);
LinearHdvCoeffs linearize_hdv(const OvmParams& p, double v_star);

}  // namespace ringflow
