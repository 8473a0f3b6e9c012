#include "ringflow/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ringflow/sdp/lyapunov.hpp"
#include "ringflow/sdp/solver.hpp"

namespace ringflow {

namespace {

/// Sparse basis of the complement of rho_0 = (1,0,1,0,...): the n velocity
/// unit vectors and the n-1 consecutive spacing differences. Sparsity here
/// keeps the SDP coefficient matrices sparse.
Eigen::MatrixXd deflation_basis(int n) {
  Eigen::MatrixXd Wb = Eigen::MatrixXd::Zero(2 * n, 2 * n - 1);
  for (int i = 0; i < n; ++i) Wb(2 * i + 1, i) = 1.0;
  for (int i = 0; i + 1 < n; ++i) {
    Wb(2 * i, n + i) = 1.0;
    Wb(2 * (i + 1), n + i) = -1.0;
  }
  return Wb;
}

struct VariableMap {
  Eigen::MatrixXi xslot;       // -1 where S* masks the entry
  std::vector<int> zslot;      // -1 where T masks the column
  int yslot = -1;
};

}  // namespace

void PerformanceWeights::validate(int n) const {
  if (!(gamma_s > 0.0) || !(gamma_v > 0.0) || !(gamma_u > 0.0)) {
    throw ValidationError("performance weights must be strictly positive");
  }
  for (const auto* per : {&gamma_s_per_vehicle, &gamma_v_per_vehicle}) {
    if (per->empty()) continue;
    if (static_cast<int>(per->size()) != n) {
      throw ValidationError("per-vehicle weight override needs n entries");
    }
    for (double g : *per) {
      if (!(g > 0.0)) {
        throw ValidationError("performance weights must be strictly positive");
      }
    }
  }
}

std::pair<Eigen::MatrixXd, double> build_performance(
    const PerformanceWeights& w, int n) {
  w.validate(n);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    const double gs =
        w.gamma_s_per_vehicle.empty() ? w.gamma_s : w.gamma_s_per_vehicle[i];
    const double gv =
        w.gamma_v_per_vehicle.empty() ? w.gamma_v : w.gamma_v_per_vehicle[i];
    Q(2 * i, 2 * i) = gs * gs;
    Q(2 * i + 1, 2 * i + 1) = gv * gv;
  }
  return {Q, w.gamma_u * w.gamma_u};
}

Eigen::MatrixXd closed_loop(const RingModel& m, const Eigen::RowVectorXd& K) {
  return m.A - m.B * K;
}

Eigen::MatrixXd output_matrix(const Eigen::MatrixXd& Q, double R,
                              const Eigen::RowVectorXd& K) {
  const int d = static_cast<int>(Q.rows());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d + 1, d);
  for (int i = 0; i < d; ++i) C(i, i) = std::sqrt(Q(i, i));
  C.row(d) = -std::sqrt(R) * K;
  return C;
}

SynthesisResult solve_structured_h2(const RingModel& m,
                                    const PerformanceWeights& w,
                                    const SparsityPattern& pattern,
                                    const SynthesisOptions& opts) {
  const int n = m.n;
  const int d = 2 * n;
  if (pattern.n != n) {
    throw ValidationError("pattern and model disagree on vehicle count");
  }
  const auto [Q, R] = build_performance(w, n);

  sdp::ConicProgram prog;
  VariableMap vm;
  vm.xslot = Eigen::MatrixXi::Constant(d, d, -1);
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      if (pattern.S_star(p, q) == 1) {
        const int s = prog.add_scalar();
        vm.xslot(p, q) = vm.xslot(q, p) = s;
      }
    }
  }
  vm.yslot = prog.add_scalar();
  vm.zslot.assign(d, -1);
  for (int c = 0; c < d; ++c) {
    if (pattern.T(c) == 1) vm.zslot[c] = prog.add_scalar();
  }

  // Objective Tr(QX) + R Y.
  for (int p = 0; p < d; ++p) prog.add_objective(vm.xslot(p, p), Q(p, p));
  prog.add_objective(vm.yslot, R);

  const Eigen::MatrixXd Wb = deflation_basis(n);
  const int dd = d - 1;

  // Deflated Lyapunov inequality
  //   -Wb'(AX + XA' - BZ - Z'B' + HH')Wb - eps Wb'Wb  >=  0.
  const int lyap = prog.add_psd_block(dd);
  {
    const Eigen::MatrixXd F0 =
        -Wb.transpose() * (m.H * m.H.transpose()) * Wb -
        opts.eps_lmi * (Wb.transpose() * Wb);
    for (int i = 0; i < dd; ++i) {
      for (int j = i; j < dd; ++j) {
        if (F0(i, j) != 0.0) prog.add_f0(lyap, i, j, F0(i, j));
      }
    }
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, d);
    for (int p = 0; p < d; ++p) {
      for (int q = p; q < d; ++q) {
        const int slot = vm.xslot(p, q);
        if (slot < 0) continue;
        E.setZero();
        E(p, q) += 1.0;
        E(q, p) += 1.0;
        if (p == q) E(p, q) = 1.0;
        const Eigen::MatrixXd C =
            -Wb.transpose() * (m.A * E + E * m.A.transpose()) * Wb;
        for (int i = 0; i < dd; ++i) {
          for (int j = i; j < dd; ++j) {
            if (C(i, j) != 0.0) prog.add_coeff(lyap, slot, i, j, C(i, j));
          }
        }
      }
    }
    for (int c = 0; c < d; ++c) {
      const int slot = vm.zslot[c];
      if (slot < 0) continue;
      Eigen::MatrixXd BZ = Eigen::MatrixXd::Zero(d, d);
      BZ.col(c) += m.B;
      const Eigen::MatrixXd C = Wb.transpose() * (BZ + BZ.transpose()) * Wb;
      for (int i = 0; i < dd; ++i) {
        for (int j = i; j < dd; ++j) {
          if (C(i, j) != 0.0) prog.add_coeff(lyap, slot, i, j, C(i, j));
        }
      }
    }
  }

  // Schur complement block [[Y, Z], [Z', X]] >= eps I.
  const int schur = prog.add_psd_block(d + 1);
  for (int i = 0; i <= d; ++i) prog.add_f0(schur, i, i, -opts.eps_schur);
  prog.add_coeff(schur, vm.yslot, 0, 0, 1.0);
  for (int c = 0; c < d; ++c) {
    if (vm.zslot[c] >= 0) prog.add_coeff(schur, vm.zslot[c], 0, c + 1, 1.0);
  }
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      if (vm.xslot(p, q) >= 0) {
        prog.add_coeff(schur, vm.xslot(p, q), p + 1, q + 1, 1.0);
      }
    }
  }

  // X >= eps_pd I.
  const int xpd = prog.add_psd_block(d);
  for (int p = 0; p < d; ++p) prog.add_f0(xpd, p, p, -opts.eps_pd);
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      if (vm.xslot(p, q) >= 0) prog.add_coeff(xpd, vm.xslot(p, q), p, q, 1.0);
    }
  }

  // Zero-mode consistency: Wb'(A X rho_0 - B Z rho_0) = 0. Together with
  // the deflated inequality this pins the full Lyapunov expression to be
  // negative semidefinite with kernel exactly rho_0, which is what makes
  // the certified cost a true H2 upper bound on the deflated subspace.
  {
    const Eigen::VectorXd rho = spacing_sum_vector(n);
    const Eigen::MatrixXd WtA = Wb.transpose() * m.A;  // (d-1) x d
    const Eigen::VectorXd WtB = Wb.transpose() * m.B;  // (d-1)
    for (int k = 0; k < dd; ++k) {
      const int eq = prog.add_equality(0.0);
      for (int p = 0; p < d; ++p) {
        for (int q = p; q < d; ++q) {
          const int slot = vm.xslot(p, q);
          if (slot < 0) continue;
          double c = 0.0;
          if (p == q) {
            c = WtA(k, p) * rho(p);
          } else {
            c = WtA(k, p) * rho(q) + WtA(k, q) * rho(p);
          }
          if (c != 0.0) prog.add_eq_coeff(eq, slot, c);
        }
      }
      for (int c = 0; c < d; ++c) {
        const int slot = vm.zslot[c];
        if (slot >= 0 && rho(c) != 0.0 && WtB(k) != 0.0) {
          prog.add_eq_coeff(eq, slot, -WtB(k) * rho(c));
        }
      }
    }
    prog.prune_trivial_equalities();
  }

  sdp::SolverOptions sopts = opts.solver;
  const sdp::SolveOutcome sol = sdp::solve(prog, sopts);
  if (sol.status == sdp::SolveStatus::Infeasible) {
    throw StructuredInfeasibleError(
        "sparsity-invariance relaxation is infeasible for this topology; "
        "the relaxation is sufficient only -- retry with a larger "
        "communication set");
  }
  if (sol.status != sdp::SolveStatus::Optimal) {
    throw NumericalFailureError("structured H2 solve failed: " + sol.message +
                                " (status " + to_string(sol.status) + ")");
  }

  SynthesisResult res;
  res.pattern = pattern;
  res.structured = !pattern.is_full();
  res.solver_rel_gap = sol.rel_gap;
  res.solver_iterations = sol.iterations;
  res.Y = sol.scalar(vm.yslot);
  res.X = Eigen::MatrixXd::Zero(d, d);
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      if (vm.xslot(p, q) >= 0) {
        res.X(p, q) = res.X(q, p) = sol.scalar(vm.xslot(p, q));
      }
    }
  }
  res.Z = Eigen::RowVectorXd::Zero(d);
  for (int c = 0; c < d; ++c) {
    if (vm.zslot[c] >= 0) res.Z(c) = sol.scalar(vm.zslot[c]);
  }
  res.certified_cost = sol.objective;

  // Gain recovery per connected component of S*: X is block diagonal over
  // the components, so inverting blockwise keeps the masked gain entries
  // exactly zero instead of rounding-level small.
  res.K = Eigen::RowVectorXd::Zero(d);
  const auto components = pattern_components(pattern.S_star);
  for (const auto& comp : components) {
    bool any_visible = false;
    for (int c : comp) any_visible = any_visible || pattern.T(c) == 1;
    if (!any_visible) continue;
    const int cd = static_cast<int>(comp.size());
    Eigen::MatrixXd Xc(cd, cd);
    Eigen::RowVectorXd Zc(cd);
    for (int a = 0; a < cd; ++a) {
      Zc(a) = res.Z(comp[a]);
      for (int b = 0; b < cd; ++b) Xc(a, b) = res.X(comp[a], comp[b]);
    }
    const Eigen::RowVectorXd Kc = Xc.ldlt().solve(Zc.transpose()).transpose();
    for (int a = 0; a < cd; ++a) res.K(comp[a]) = Kc(a);
  }
  // The invariance property makes in-component masked entries vanish
  // mathematically; verify before zeroing them out.
  const double leak = max_masked_magnitude(res.K, pattern.mask);
  const double scale = std::max(1.0, res.K.cwiseAbs().maxCoeff());
  if (leak > 1e-8 * scale) {
    throw NumericalFailureError(
        "recovered gain violates the communication mask beyond tolerance");
  }
  for (int c = 0; c < d; ++c) {
    if (pattern.mask(c) == 0) res.K(c) = 0.0;
  }

  // Spectrum sanity: one structural zero, everything else strictly stable.
  const Eigen::MatrixXd Acl = closed_loop(m, res.K);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Acl);
  int marginal = 0;
  for (int i = 0; i < d; ++i) {
    const auto lam = es.eigenvalues()(i);
    if (std::abs(lam) <= 1e-7) {
      ++marginal;
    } else if (lam.real() >= 0.0) {
      throw NumericalFailureError(
          "closed loop from the recovered gain is not marginally stable");
    }
  }
  if (marginal != 1) {
    throw NumericalFailureError(
        "closed loop does not show exactly one structural zero eigenvalue");
  }
  return res;
}

double h2_norm(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& H,
               const Eigen::MatrixXd& C, double zero_tol) {
  const int d = static_cast<int>(A_cl.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(A_cl);
  int marginal = 0;
  for (int i = 0; i < d; ++i) {
    const auto lam = es.eigenvalues()(i);
    if (std::abs(lam) <= zero_tol) {
      ++marginal;
    } else if (lam.real() >= -1e-12) {
      throw UnboundedNormError(
          "A_cl has an eigenvalue on or beyond the imaginary axis away from "
          "the structural zero");
    }
  }
  if (marginal == 0) {
    const Eigen::MatrixXd P =
        sdp::lyapunov_solve(A_cl, H * H.transpose());
    return std::sqrt((C * P * C.transpose()).trace());
  }
  if (marginal != 1) {
    throw UnboundedNormError("zero eigenvalue of A_cl is not simple");
  }

  // Left null direction of A_cl; the disturbance must not excite it.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A_cl.transpose(),
                                        Eigen::ComputeFullV);
  const Eigen::VectorXd rho = svd.matrixV().col(d - 1);
  if ((rho.transpose() * H).cwiseAbs().maxCoeff() >
      zero_tol * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    throw UnboundedNormError(
        "disturbance excites the marginal mode: H2 norm is unbounded");
  }

  // Orthonormal completion of rho spans an invariant subspace of A_cl.
  Eigen::MatrixXd seed = Eigen::MatrixXd::Zero(d, 1);
  seed.col(0) = rho;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(seed);
  const Eigen::MatrixXd Qfull = qr.householderQ();
  const Eigen::MatrixXd U = Qfull.rightCols(d - 1);

  const Eigen::MatrixXd At = U.transpose() * A_cl * U;
  const Eigen::MatrixXd Ht = U.transpose() * H;
  const Eigen::MatrixXd Ct = C * U;
  Eigen::MatrixXd P;
  try {
    P = sdp::lyapunov_solve(At, Ht * Ht.transpose());
  } catch (const SpectrumError&) {
    throw UnboundedNormError("deflated dynamics are not Hurwitz");
  }
  return std::sqrt((Ct * P * Ct.transpose()).trace());
}

}  // namespace ringflow
