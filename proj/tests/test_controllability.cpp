#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ringflow/controllability.hpp"
#include "ringflow/rng.hpp"

using namespace ringflow;

namespace {

RingModel model_from_fleet(const std::vector<OvmParams>& fleet, double v_star,
                           double length) {
  std::vector<OptimalVelocityLaw> laws;
  for (std::size_t i = 1; i < fleet.size(); ++i) laws.emplace_back(fleet[i]);
  std::vector<const CarFollowingLaw*> ptrs;
  for (const auto& l : laws) ptrs.push_back(&l);
  return build_ring_model(ptrs, v_star, length);
}

RingModel homogeneous(int n, double length) {
  return model_from_fleet(std::vector<OvmParams>(n, OvmParams{}), 15.0,
                          length);
}

RingModel paper_heterogeneous(int n, std::uint64_t seed) {
  const auto fleet = sample_fleet({OvmParams{}, 0.1, 0.1, 5.0}, n, seed);
  return model_from_fleet(fleet, 15.0, 20.0 * n);
}

}  // namespace

TEST_CASE("transformed matrix annihilates the spacing-sum vector exactly") {
  const RingModel m = paper_heterogeneous(8, 11);
  const Eigen::MatrixXd ahat = transform_to_hat(m, default_cav_coeffs(m));
  const Eigen::VectorXd rho = spacing_sum_vector(m.n);
  CHECK((rho.transpose() * ahat).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rho.dot(m.B) == 0.0);
}

TEST_CASE("transformed matrix has the all-HDV block structure") {
  const RingModel m = homogeneous(3, 90.0);
  const LinearHdvCoeffs c = default_cav_coeffs(m);
  const Eigen::MatrixXd ahat = transform_to_hat(m, c);
  CHECK(ahat(1, 0) == doctest::Approx(c.a1));
  CHECK(ahat(1, 1) == doctest::Approx(-c.a2));
  CHECK(ahat(1, 5) == doctest::Approx(c.a3));
  // Off-structure blocks of row-block 1 stay empty.
  CHECK(ahat.block(0, 2, 2, 2).cwiseAbs().sum() == 0.0);
}

TEST_CASE("kernel of the transformed matrix has the closed form") {
  const RingModel m = paper_heterogeneous(10, 5);
  const LinearHdvCoeffs cav = default_cav_coeffs(m);
  const Eigen::MatrixXd ahat = transform_to_hat(m, cav);
  Eigen::VectorXd p(2 * m.n);
  std::vector<LinearHdvCoeffs> all = m.hdv_coeffs;
  all.insert(all.begin(), cav);
  for (int i = 0; i < m.n; ++i) {
    p(2 * i) = (all[i].a2 - all[i].a3) / all[i].a1;
    p(2 * i + 1) = 1.0;
  }
  CHECK((ahat * p).cwiseAbs().maxCoeff() < 1e-12 * ahat.cwiseAbs().maxCoeff());
}

TEST_CASE("PBH report for the paper-scale homogeneous ring") {
  const RingModel m = homogeneous(20, 400.0);
  const PbhReport r = pbh_analysis(m, default_cav_coeffs(m), 1e-8);
  REQUIRE(r.uncontrollable_modes.size() == 1);
  CHECK(std::abs(r.uncontrollable_modes[0].eigenvalue) < 1e-8);
  CHECK_FALSE(r.is_controllable);
  CHECK(r.is_stabilizable);
  CHECK(r.dim_ker == 1);
  CHECK(r.dim_ker_sq == 1);
  CHECK(r.zero_mode_multiplicity == 1);
  CHECK(r.condition_14);
  CHECK(r.eigenvalues.size() == 40);

  // The certified mode satisfies the left-eigenvector equations.
  const Eigen::MatrixXd ahat = transform_to_hat(m, default_cav_coeffs(m));
  const auto& mode = r.uncontrollable_modes[0];
  const Eigen::VectorXcd resid =
      ahat.transpose().cast<std::complex<double>>() * mode.left_vector -
      std::conj(mode.eigenvalue) * mode.left_vector;
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-7 * ahat.cwiseAbs().maxCoeff());
  CHECK(std::abs(mode.left_vector.dot(m.B.cast<std::complex<double>>())) <
        1e-8);
}

TEST_CASE("PBH analysis is invariant to the fictitious CAV coefficients") {
  const RingModel m = paper_heterogeneous(9, 2);
  const PbhReport a = pbh_analysis(m, LinearHdvCoeffs{0.5, 1.2, 0.4});
  const PbhReport b = pbh_analysis(m, LinearHdvCoeffs{2.0, 3.0, 1.0});
  CHECK(a.uncontrollable_modes.size() == b.uncontrollable_modes.size());
  CHECK(a.is_stabilizable == b.is_stabilizable);
  CHECK(a.zero_mode_multiplicity == b.zero_mode_multiplicity);
}

TEST_CASE("uncontrollable eigenvalues agree between (A,B) and (Ahat,B)") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RingModel m = paper_heterogeneous(6, seed);
    const Eigen::MatrixXd ahat = transform_to_hat(m, default_cav_coeffs(m));
    Eigen::MatrixXd Bm = m.B;
    const auto from_a = uncontrollable_eigenvalues(m.A, Bm);
    const auto from_hat = uncontrollable_eigenvalues(ahat, Bm);
    REQUIRE(from_a.size() == from_hat.size());
    for (std::size_t i = 0; i < from_a.size(); ++i) {
      bool matched = false;
      for (std::size_t j = 0; j < from_hat.size(); ++j) {
        matched = matched || std::abs(from_a[i] - from_hat[j]) < 1e-6;
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("Kalman rank cross-check at small sizes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (int n = 2; n <= 4; ++n) {
      const RingModel m = paper_heterogeneous(n, seed);
      const PbhReport r = pbh_analysis(m, default_cav_coeffs(m));
      Eigen::MatrixXd Bm = m.B;
      const int rank = kalman_controllability_rank(m.A, Bm);
      CHECK(rank ==
            2 * n - static_cast<int>(r.uncontrollable_modes.size()));
    }
  }
}

TEST_CASE("zero mode stays simple across random heterogeneous models") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const RingModel m = paper_heterogeneous(12, seed);
    const PbhReport r = pbh_analysis(m, default_cav_coeffs(m));
    CHECK(r.zero_mode_multiplicity == 1);
    CHECK(r.dim_ker == 1);
    CHECK(r.dim_ker_sq == 1);
  }
}

TEST_CASE("closed-form stabilizability condition") {
  // Homogeneous defaults: a1 - a2 a3 + a3^2 = 0.3 pi - 1.35 + 0.81 != 0.
  const LinearHdvCoeffs c = linearize_hdv(OvmParams{}, 15.0);
  CHECK(check_stabilizability_condition({c, c, c}));
  CHECK(c.a1 - c.a2 * c.a3 + c.a3 * c.a3 ==
        doctest::Approx(0.4025).epsilon(1e-3));

  // Constructed to zero the reduced expression: a1 = a2 a3 - a3^2.
  const LinearHdvCoeffs zeroed{0.54, 1.5, 0.9};
  CHECK_FALSE(check_stabilizability_condition({zeroed, zeroed}));

  // Random heterogeneous pairs hold with probability one.
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    std::vector<LinearHdvCoeffs> coeffs;
    for (int i = 0; i < 5; ++i) {
      const double a3 = rng.uniform(0.5, 1.2);
      coeffs.push_back(
          {rng.uniform(0.5, 1.5), a3 + rng.uniform(0.1, 0.8), a3});
    }
    CHECK(check_stabilizability_condition(coeffs));
  }
}

TEST_CASE("eigenvalue non-degeneracy condition") {
  const std::vector<LinearHdvCoeffs> root_case{{0.5, 1.5, 0.9}};
  // lambda = -0.5 solves lambda^2 + 1.5 lambda + 0.5 = 0.
  CHECK_FALSE(verify_eigenvalue_condition(root_case, {-0.5, 0.0}));
  // a3 lambda + a2 = 0 at lambda = -5/3 for a3 = 0.9, a2 = 1.5.
  const std::vector<LinearHdvCoeffs> lin_case{{1.0, 1.5, 0.9}};
  CHECK_FALSE(verify_eigenvalue_condition(lin_case, {-5.0 / 3.0, 0.0}));
  CHECK_THROWS_AS(verify_eigenvalue_condition(lin_case, {0.0, 0.0}),
                  DomainError);

  // Every computed nonzero eigenvalue of the homogeneous ring passes.
  const RingModel m = homogeneous(12, 240.0);
  const LinearHdvCoeffs cav = default_cav_coeffs(m);
  std::vector<LinearHdvCoeffs> all = m.hdv_coeffs;
  all.insert(all.begin(), cav);
  const PbhReport r = pbh_analysis(m, cav);
  for (int i = 0; i < r.eigenvalues.size(); ++i) {
    if (std::abs(r.eigenvalues(i)) < 1e-7) continue;
    CHECK(verify_eigenvalue_condition(all, r.eigenvalues(i)));
  }
}
