#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ringflow/car_following.hpp"
#include "ringflow/rng.hpp"

using namespace ringflow;

namespace {

/// Exposes the base-class bisection / finite-difference fallbacks for a law
/// that only provides accel(), mirroring how a non-OVM law would plug in.
class OpaqueOvm : public CarFollowingLaw {
 public:
  explicit OpaqueOvm(const OvmParams& p) : inner_(p) {}
  double accel(double s, double sdot, double v) const override {
    return inner_.accel(s, sdot, v);
  }
  std::pair<double, double> spacing_bracket() const override {
    return inner_.spacing_bracket();
  }
  double max_equilibrium_speed() const override {
    return inner_.max_equilibrium_speed();
  }

 private:
  OptimalVelocityLaw inner_;
};

OvmParams defaults() { return OvmParams{}; }

}  // namespace

TEST_CASE("acceleration vanishes at the analytic equilibrium") {
  // V(20) = 15 by the closed-form profile, so the residual is zero.
  CHECK(std::abs(ovm_acceleration(defaults(), 20.0, 0.0, 15.0)) < 1e-10);
  // Standstill and free-flow boundaries.
  CHECK(ovm_acceleration(defaults(), 5.0, 0.0, 0.0) == 0.0);
  CHECK(ovm_acceleration(defaults(), 40.0, 0.0, 30.0) == 0.0);
}

TEST_CASE("desired velocity profile is continuous at its break points") {
  const OptimalVelocityLaw law(defaults());
  const double eps = 1e-12;
  CHECK(std::abs(law.desired_velocity(5.0 - eps) -
                 law.desired_velocity(5.0 + eps)) < 1e-9);
  CHECK(std::abs(law.desired_velocity(35.0 - eps) -
                 law.desired_velocity(35.0 + eps)) < 1e-9);
  CHECK(law.desired_velocity(5.0) == 0.0);
  CHECK(law.desired_velocity(35.0) == 30.0);
}

TEST_CASE("equilibrium spacing closed form") {
  CHECK(ovm_equilibrium_spacing(defaults(), 15.0) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(ovm_equilibrium_spacing(defaults(), 0.0) == doctest::Approx(5.0));
  CHECK(ovm_equilibrium_spacing(defaults(), 30.0) == doctest::Approx(35.0));
  CHECK_THROWS_AS(ovm_equilibrium_spacing(defaults(), -1.0), DomainError);
  CHECK_THROWS_AS(ovm_equilibrium_spacing(defaults(), 30.5), DomainError);
}

TEST_CASE("equilibrium spacing is monotone in the target speed") {
  const OvmParams p = defaults();
  double prev = ovm_equilibrium_spacing(p, 0.0);
  for (int k = 1; k <= 60; ++k) {
    const double v = 30.0 * k / 60.0;
    const double s = ovm_equilibrium_spacing(p, v);
    CHECK(s >= prev - 1e-12);
    prev = s;
  }
}

TEST_CASE("generic-law bisection fallback matches the closed form") {
  const OpaqueOvm law(defaults());
  CHECK(std::abs(law.equilibrium_spacing(15.0) - 20.0) < 1e-8);
  CHECK(std::abs(law.equilibrium_spacing(7.5) -
                 ovm_equilibrium_spacing(defaults(), 7.5)) < 1e-8);
}

TEST_CASE("linearization at v* = 15 with default parameters") {
  const LinearHdvCoeffs c = linearize_hdv(defaults(), 15.0);
  // a1 = alpha * V'(20) with V'(20) = pi/2.
  CHECK(c.a1 == doctest::Approx(0.3 * M_PI).epsilon(1e-12));
  CHECK(c.a2 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(c.a3 == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("linearization coefficients follow the closed-form partials") {
  OvmParams p = defaults();
  p.alpha = 0.5;
  p.beta = 0.6;
  const LinearHdvCoeffs c = linearize_hdv(p, 15.0);
  CHECK(c.a2 == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(c.a3 == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("linearization rejects degenerate boundary equilibria") {
  CHECK_THROWS_AS(linearize_hdv(defaults(), 0.0),
                  DegenerateLinearizationError);
  CHECK_THROWS_AS(linearize_hdv(defaults(), 30.0),
                  DegenerateLinearizationError);
}

TEST_CASE("analytic partials match central finite differences") {
  Rng rng(7);
  const OvmParams base = defaults();
  for (int trial = 0; trial < 100; ++trial) {
    OvmParams p = base;
    p.alpha = rng.uniform(0.4, 0.9);
    p.beta = rng.uniform(0.7, 1.2);
    p.s_go = rng.uniform(30.0, 40.0);
    const double v_star = rng.uniform(2.0, 0.9 * p.v_max);
    const OptimalVelocityLaw law(p);
    const double s_star = law.equilibrium_spacing(v_star);

    // Equilibrium residual property.
    CHECK(std::abs(law.accel(s_star, 0.0, v_star)) < 1e-10);

    const auto analytic = law.partials(s_star, 0.0, v_star);
    const double h = 1e-6;
    const double d_s =
        (law.accel(s_star + h, 0.0, v_star) - law.accel(s_star - h, 0.0, v_star)) /
        (2 * h);
    const double d_sdot =
        (law.accel(s_star, h, v_star) - law.accel(s_star, -h, v_star)) / (2 * h);
    const double d_v =
        (law.accel(s_star, 0.0, v_star + h) - law.accel(s_star, 0.0, v_star - h)) /
        (2 * h);
    CHECK(analytic[0] == doctest::Approx(d_s).epsilon(1e-6));
    CHECK(analytic[1] == doctest::Approx(d_sdot).epsilon(1e-6));
    CHECK(analytic[2] == doctest::Approx(d_v).epsilon(1e-6));

    const LinearHdvCoeffs c = linearize_hdv(law, v_star);
    CHECK(c.a1 == doctest::Approx(d_s).epsilon(1e-6));
    CHECK(c.a2 == doctest::Approx(d_sdot - d_v).epsilon(1e-6));
    CHECK(c.a3 == doctest::Approx(d_sdot).epsilon(1e-6));
  }
}

TEST_CASE("parameter validation") {
  OvmParams p = defaults();
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = defaults();
  p.beta = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = defaults();
  p.s_st = 40.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  LinearHdvCoeffs bad{1.0, 0.5, 0.9};  // a2 <= a3
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  LinearHdvCoeffs good{1.0, 1.5, 0.9};
  CHECK_NOTHROW(good.validate());
}
