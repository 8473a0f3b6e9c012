#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ringflow/rng.hpp"
#include "ringflow/sdp/lyapunov.hpp"
#include "ringflow/sdp/solver.hpp"

using namespace ringflow;
using namespace ringflow::sdp;

TEST_CASE("svec/smat round trip preserves matrices and inner products") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 6;
    Eigen::MatrixXd A(d, d), B(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        A(i, j) = rng.uniform(-1, 1);
        B(i, j) = rng.uniform(-1, 1);
      }
    }
    A = Eigen::MatrixXd(0.5 * (A + A.transpose()));
    B = Eigen::MatrixXd(0.5 * (B + B.transpose()));
    CHECK((smat(svec(A)) - A).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(svec(A).dot(svec(B)) ==
          doctest::Approx(A.cwiseProduct(B).sum()).epsilon(1e-12));
  }
}

TEST_CASE("scalar bound: minimize x subject to x - 1 >= 0") {
  ConicProgram p;
  const int x = p.add_scalar();
  p.add_objective(x, 1.0);
  const int blk = p.add_psd_block(1);
  p.add_f0(blk, 0, 0, -1.0);
  p.add_coeff(blk, x, 0, 0, 1.0);

  const SolveOutcome out = solve(p);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.scalar(x) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(out.objective >= out.dual_objective - 1e-6);
}

TEST_CASE("matrix dominance: minimize Tr(X) subject to X >= M, X >= 0") {
  // M with eigenvalues {-1, 2}; the optimizer is the PSD-cone projection of
  // M, so the optimal trace equals the positive part sum. Without X >= 0
  // the problem would be solved by X = M itself.
  Eigen::Matrix2d D;
  D << -1.0, 0.0, 0.0, 2.0;
  const double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::Matrix2d Rot;
  Rot << c, -s, s, c;
  const Eigen::Matrix2d M = Rot * D * Rot.transpose();

  ConicProgram p;
  const MatVar X = p.add_symmetric(2);
  for (int i = 0; i < 2; ++i) p.add_objective(p.slot(X, i, i), 1.0);
  const int blk = p.add_psd_block(2);
  const int cone = p.add_psd_block(2);
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      p.add_f0(blk, i, j, -M(i, j));
      p.add_coeff(blk, p.slot(X, i, j), i, j, 1.0);
      p.add_coeff(cone, p.slot(X, i, j), i, j, 1.0);
    }
  }
  const SolveOutcome out = solve(p);
  REQUIRE(out.status == SolveStatus::Optimal);

  // Independent oracle: sum of positive eigenvalues of M.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  const double expected = es.eigenvalues().cwiseMax(0.0).sum();
  CHECK(out.objective == doctest::Approx(expected).epsilon(1e-6));
  const Eigen::MatrixXd Xv = out.matrix(X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gap(
      Eigen::MatrixXd(Xv - M));
  CHECK(gap.eigenvalues().minCoeff() > -1e-7);
}

TEST_CASE("Lyapunov feasibility: X >= eps I with -2X + I <= 0") {
  ConicProgram p;
  const MatVar X = p.add_symmetric(3);
  const int lmi = p.add_psd_block(3);
  // -(A0 X + X A0' + I) = 2X - I >= 0 for A0 = -I.
  for (int i = 0; i < 3; ++i) {
    p.add_f0(lmi, i, i, -1.0);
    for (int j = i; j < 3; ++j) {
      p.add_coeff(lmi, p.slot(X, i, j), i, j, 2.0);
    }
  }
  const int pd = p.add_psd_block(3);
  for (int i = 0; i < 3; ++i) {
    p.add_f0(pd, i, i, -1e-6);
    for (int j = i; j < 3; ++j) {
      p.add_coeff(pd, p.slot(X, i, j), i, j, 1.0);
    }
  }
  const SolveOutcome out = solve(p);
  REQUIRE(out.status == SolveStatus::Optimal);
  const Eigen::MatrixXd Xv = out.matrix(X);
  const Eigen::MatrixXd resid =
      -2.0 * Xv + Eigen::MatrixXd::Identity(3, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(resid);
  CHECK(es.eigenvalues().maxCoeff() <= 1e-7);
  CHECK(out.max_psd_violation <= 1e-7);
}

TEST_CASE("equality-constrained trace minimization has the analytic optimum") {
  // min Tr X s.t. X >= I, X_01 = 0.3; optimum at X = [[1.3, .3],[.3, 1.3]].
  ConicProgram p;
  const MatVar X = p.add_symmetric(2);
  for (int i = 0; i < 2; ++i) p.add_objective(p.slot(X, i, i), 1.0);
  const int blk = p.add_psd_block(2);
  for (int i = 0; i < 2; ++i) {
    p.add_f0(blk, i, i, -1.0);
    for (int j = i; j < 2; ++j) {
      p.add_coeff(blk, p.slot(X, i, j), i, j, 1.0);
    }
  }
  const int eq = p.add_equality(0.3);
  p.add_eq_coeff(eq, p.slot(X, 0, 1), 1.0);

  const SolveOutcome out = solve(p);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(2.6).epsilon(1e-6));
  CHECK(out.scalar(p.slot(X, 0, 1)) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(out.max_eq_violation < 1e-8);
}

TEST_CASE("infeasible scalar system is certified") {
  // x >= 1 and -x >= 0 cannot hold together.
  ConicProgram p;
  const int x = p.add_scalar();
  p.add_objective(x, 1.0);
  const int b1 = p.add_psd_block(1);
  p.add_f0(b1, 0, 0, -1.0);
  p.add_coeff(b1, x, 0, 0, 1.0);
  const int b2 = p.add_psd_block(1);
  p.add_coeff(b2, x, 0, 0, -1.0);

  const SolveOutcome out = solve(p);
  CHECK(out.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded objective is flagged") {
  ConicProgram p;
  const int x = p.add_scalar();
  p.add_objective(x, -1.0);
  const int blk = p.add_psd_block(1);
  p.add_coeff(blk, x, 0, 0, 1.0);
  const SolveOutcome out = solve(p);
  CHECK(out.status == SolveStatus::Unbounded);
}

TEST_CASE("objective scaling leaves the optimizer in place") {
  const auto build = [](double scale) {
    ConicProgram p;
    const MatVar X = p.add_symmetric(2);
    for (int i = 0; i < 2; ++i) p.add_objective(p.slot(X, i, i), scale);
    const int blk = p.add_psd_block(2);
    p.add_f0(blk, 0, 0, -2.0);
    p.add_f0(blk, 0, 1, -0.5);
    p.add_f0(blk, 1, 1, -1.0);
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) {
        p.add_coeff(blk, p.slot(X, i, j), i, j, 1.0);
      }
    }
    return p;
  };
  const SolveOutcome a = solve(build(1.0));
  const SolveOutcome b = solve(build(5.0));
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(b.objective == doctest::Approx(5.0 * a.objective).epsilon(1e-7));
}

TEST_CASE("identical inputs give identical outcomes") {
  const auto run_once = []() {
    ConicProgram p;
    const MatVar X = p.add_symmetric(3);
    for (int i = 0; i < 3; ++i) p.add_objective(p.slot(X, i, i), 1.0);
    const int blk = p.add_psd_block(3);
    Eigen::Matrix3d M;
    M << 1.0, 0.2, -0.1, 0.2, 0.5, 0.3, -0.1, 0.3, 2.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        p.add_f0(blk, i, j, -M(i, j));
        p.add_coeff(blk, p.slot(X, i, j), i, j, 1.0);
      }
    }
    return solve(p);
  };
  const SolveOutcome a = run_once();
  const SolveOutcome b = run_once();
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.objective == b.objective);
}

TEST_CASE("lyapunov_solve closed forms and residual oracle") {
  Eigen::MatrixXd M(1, 1), W(1, 1);
  M << -1.0;
  W << 1.0;
  CHECK(lyapunov_solve(M, W)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  Eigen::MatrixXd M2 = Eigen::MatrixXd::Zero(2, 2);
  M2(0, 0) = -1.0;
  M2(1, 1) = -2.0;
  const Eigen::MatrixXd P2 =
      lyapunov_solve(M2, Eigen::MatrixXd::Identity(2, 2));
  CHECK(P2(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(P2(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(P2(0, 1)) < 1e-14);

  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd A(10, 10), G(10, 10);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        A(i, j) = rng.uniform(-1, 1);
        G(i, j) = rng.uniform(-1, 1);
      }
    }
    A -= 8.0 * Eigen::MatrixXd::Identity(10, 10);
    const Eigen::MatrixXd Wp = G * G.transpose();
    const Eigen::MatrixXd P = lyapunov_solve(A, Wp);
    const double resid = (A * P + P * A.transpose() + Wp).norm();
    CHECK(resid <= 1e-10 * (A.norm() * P.norm() + Wp.norm()));
  }

  Eigen::MatrixXd bad(2, 2);
  bad << 0.1, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(lyapunov_solve(bad, Eigen::MatrixXd::Identity(2, 2)),
                  SpectrumError);
}
