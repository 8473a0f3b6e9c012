#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ringflow/ring_model.hpp"

using namespace ringflow;

namespace {

RingModel homogeneous_ring(int n, double v_star, double length) {
  const OvmParams p{};
  std::vector<OptimalVelocityLaw> laws(n - 1, OptimalVelocityLaw(p));
  std::vector<const CarFollowingLaw*> ptrs;
  for (const auto& l : laws) ptrs.push_back(&l);
  return build_ring_model(ptrs, v_star, length);
}

}  // namespace

TEST_CASE("two-vehicle ring has the documented block layout") {
  const RingModel m = homogeneous_ring(2, 15.0, 40.0);
  const LinearHdvCoeffs c = linearize_hdv(OvmParams{}, 15.0);

  REQUIRE(m.n == 2);
  // CAV spacing row couples to its own and the predecessor's velocity.
  CHECK(m.A(0, 1) == -1.0);
  CHECK(m.A(0, 3) == 1.0);
  // CAV velocity row is the input row.
  CHECK(m.A.row(1).cwiseAbs().maxCoeff() == 0.0);
  // HDV block row: spacing then the linearized law.
  CHECK(m.A(2, 3) == -1.0);
  CHECK(m.A(2, 1) == 1.0);
  CHECK(m.A(3, 2) == doctest::Approx(c.a1));
  CHECK(m.A(3, 3) == doctest::Approx(-c.a2));
  CHECK(m.A(3, 1) == doctest::Approx(c.a3));

  CHECK(m.B(1) == 1.0);
  CHECK(m.B.cwiseAbs().sum() == 1.0);

  CHECK(m.H(1, 0) == 1.0);
  CHECK(m.H(3, 1) == 1.0);
  CHECK(m.H.cwiseAbs().sum() == 2.0);
}

TEST_CASE("ring-length bookkeeping for the paper-scale ring") {
  const RingModel m = homogeneous_ring(20, 15.0, 400.0);
  CHECK(m.s_star_cav() == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::abs(m.s_star.sum() - 400.0) < 1e-9);
  // Every HDV sits at the closed-form equilibrium spacing.
  for (int i = 1; i < 20; ++i) {
    CHECK(m.s_star(i) == doctest::Approx(20.0).epsilon(1e-12));
  }
}

TEST_CASE("ring that cannot fit the equilibrium is rejected") {
  CHECK_THROWS_AS(homogeneous_ring(20, 15.0, 100.0),
                  InfeasibleEquilibriumError);
}

TEST_CASE("A matrix keeps the block-circulant bidiagonal sparsity") {
  std::vector<OvmParams> fleet =
      sample_fleet({OvmParams{}, 0.1, 0.1, 5.0}, 12, 3);
  std::vector<OptimalVelocityLaw> laws;
  for (int i = 1; i < 12; ++i) laws.emplace_back(fleet[i]);
  std::vector<const CarFollowingLaw*> ptrs;
  for (const auto& l : laws) ptrs.push_back(&l);
  const RingModel m = build_ring_model(ptrs, 15.0, 250.0);

  const int n = m.n;
  for (int bi = 0; bi < n; ++bi) {
    for (int bj = 0; bj < n; ++bj) {
      const bool diag = bi == bj;
      const bool sub = bj == (bi + n - 1) % n;
      const double norm = m.A.block(2 * bi, 2 * bj, 2, 2).cwiseAbs().sum();
      if (!diag && !sub) CHECK(norm == 0.0);
    }
  }
}

TEST_CASE("fleet sampling is reproducible and honors the jitter bounds") {
  const FleetDistribution dist{OvmParams{}, 0.1, 0.1, 5.0};
  const auto a = sample_fleet(dist, 20, 0);
  const auto b = sample_fleet(dist, 20, 0);
  const auto c = sample_fleet(dist, 20, 1);
  REQUIRE(a.size() == 20);
  bool identical = true;
  bool different = false;
  for (int i = 0; i < 20; ++i) {
    identical = identical && a[i].alpha == b[i].alpha &&
                a[i].beta == b[i].beta && a[i].s_go == b[i].s_go;
    different = different || a[i].alpha != c[i].alpha;
    CHECK(a[i].alpha >= 0.5);
    CHECK(a[i].alpha <= 0.7);
    CHECK(a[i].beta >= 0.8);
    CHECK(a[i].beta <= 1.0);
    CHECK(a[i].s_go >= 30.0);
    CHECK(a[i].s_go <= 40.0);
  }
  CHECK(identical);
  CHECK(different);
}

TEST_CASE("maximum reachable velocity: bisection against the closed form") {
  const OvmParams p{};
  const OptimalVelocityLaw law(p);
  std::vector<const CarFollowingLaw*> hdvs(19, &law);
  const double by_bisection = max_reachable_velocity(hdvs, 400.0);
  const double closed_form = law.desired_velocity(400.0 / 19.0);
  CHECK(std::abs(by_bisection - closed_form) < 1e-6);
  CHECK(by_bisection == doctest::Approx(16.65).epsilon(1e-3));
}

TEST_CASE("maximum reachable velocity saturates on a long empty ring") {
  const OvmParams p{};
  const OptimalVelocityLaw law(p);
  std::vector<const CarFollowingLaw*> hdvs(3, &law);
  // 3 * s_go = 105 << 1000: free flow fits, the cap is v_max itself.
  CHECK(max_reachable_velocity(hdvs, 1000.0) == doctest::Approx(30.0));
}

TEST_CASE("standstill spacings exceeding the ring are rejected") {
  const OvmParams p{};
  const OptimalVelocityLaw law(p);
  std::vector<const CarFollowingLaw*> hdvs(30, &law);
  CHECK_THROWS_AS(max_reachable_velocity(hdvs, 100.0),
                  InfeasibleEquilibriumError);
}
