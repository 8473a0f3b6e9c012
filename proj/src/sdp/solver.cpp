#include "ringflow/sdp/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ringflow/sdp/schur_kernel.hpp"

namespace ringflow::sdp {

namespace {

struct Workspace {
  std::vector<BlockData> blocks;
  Eigen::VectorXd b;       // objective
  Eigen::MatrixXd G;       // equality rows
  Eigen::VectorXd g;       // equality rhs
  int m = 0;               // variable count
  int k_eq = 0;            // equality count
  double total_dim = 0.0;  // sum of block orders
};

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& A) {
  return 0.5 * (A + A.transpose());
}

/// Largest step alpha with X + alpha * D staying positive definite,
/// capped at `cap`.
double max_step(const Eigen::LLT<Eigen::MatrixXd>& lltX,
                const Eigen::MatrixXd& D, double cap) {
  const Eigen::MatrixXd L = lltX.matrixL();
  Eigen::MatrixXd T = L.triangularView<Eigen::Lower>().solve(D);
  T = L.triangularView<Eigen::Lower>()
          .solve(Eigen::MatrixXd(T.transpose()))
          .transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(T),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return cap;
  return std::min(cap, -1.0 / lmin);
}

struct Iterate {
  Eigen::VectorXd y;
  Eigen::VectorXd nu;
  std::vector<Eigen::MatrixXd> S;  // block slacks, PD
  std::vector<Eigen::MatrixXd> W;  // block duals, PD
};

struct Residuals {
  std::vector<Eigen::MatrixXd> Rd;  // F(y) - S per block
  Eigen::VectorXd r_eq;             // g - G y
  Eigen::VectorXd r_stat;           // b - A*(W) - G' nu
  double gap = 0.0;
  double mu = 0.0;
  double p_infeas = 0.0;
  double d_infeas = 0.0;
  double pobj = 0.0;
  double dobj = 0.0;
  double rel_gap = 0.0;
};

Residuals compute_residuals(const Workspace& ws, const Iterate& it) {
  Residuals r;
  r.Rd.resize(ws.blocks.size());
  r.r_stat = ws.b;
  r.gap = 0.0;
  double p_err = 0.0;
  double f0_dot_w = 0.0;
  for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
    const auto& blk = ws.blocks[k];
    r.Rd[k] = block_value(blk, it.y) - it.S[k];
    p_err = std::max(p_err,
                     r.Rd[k].cwiseAbs().maxCoeff() /
                         (1.0 + blk.F0.cwiseAbs().maxCoeff()));
    r.gap += it.S[k].cwiseProduct(it.W[k]).sum();
    f0_dot_w += blk.F0.cwiseProduct(it.W[k]).sum();
    Eigen::VectorXd adj = Eigen::VectorXd::Zero(ws.m);
    accumulate_inner_products(blk, it.W[k], adj);
    r.r_stat -= adj;
  }
  if (ws.k_eq > 0) {
    r.r_eq = ws.g - ws.G * it.y;
    r.r_stat -= ws.G.transpose() * it.nu;
    p_err = std::max(p_err, r.r_eq.cwiseAbs().maxCoeff() /
                                (1.0 + ws.g.cwiseAbs().maxCoeff()));
  } else {
    r.r_eq.resize(0);
  }
  r.p_infeas = p_err;
  const double b_scale = 1.0 + ws.b.cwiseAbs().maxCoeff();
  r.d_infeas = r.r_stat.cwiseAbs().maxCoeff() / b_scale;
  r.mu = r.gap / ws.total_dim;
  r.pobj = ws.b.dot(it.y);
  r.dobj = -f0_dot_w + (ws.k_eq > 0 ? ws.g.dot(it.nu) : 0.0);
  r.rel_gap = r.gap / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  return r;
}

/// Farkas-type certificate: A*(W) + G' nu ~ 0 with g' nu - <F0, W> > 0
/// proves that no y satisfies the constraints.
bool infeasibility_certificate(const Workspace& ws, const Iterate& it,
                               double tol = 1e-9) {
  Eigen::VectorXd adj = Eigen::VectorXd::Zero(ws.m);
  double f0_dot_w = 0.0;
  for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
    accumulate_inner_products(ws.blocks[k], it.W[k], adj);
    f0_dot_w += ws.blocks[k].F0.cwiseProduct(it.W[k]).sum();
  }
  if (ws.k_eq > 0) adj += ws.G.transpose() * it.nu;
  const double ray_obj =
      (ws.k_eq > 0 ? ws.g.dot(it.nu) : 0.0) - f0_dot_w;
  if (ray_obj <= 0.0) return false;
  return adj.cwiseAbs().maxCoeff() <= tol * ray_obj;
}

}  // namespace

SolveOutcome solve(const ConicProgram& program, const SolverOptions& options) {
  if (!(options.feas_tol > 0.0) || !(options.gap_tol > 0.0)) {
    throw DomainError("solver tolerances must be positive");
  }
  if (program.num_psd_blocks() == 0) {
    throw ValidationError("program has no PSD constraints");
  }
  const ExecPolicy exec =
      options.parallel ? ExecPolicy::Parallel : ExecPolicy::Serial;

  Workspace ws;
  ws.m = program.num_slots();
  ws.b = Eigen::VectorXd::Zero(ws.m);
  for (int i = 0; i < ws.m; ++i) ws.b(i) = program.objective()[i];
  // Internal objective normalization; primal variables are unaffected and
  // reported values are scaled back on exit.
  const double b_scale = std::max(ws.b.cwiseAbs().maxCoeff(), 1e-12);
  ws.b /= b_scale;
  ws.k_eq = static_cast<int>(program.equalities().size());
  if (ws.k_eq > 0) {
    ws.G = Eigen::MatrixXd::Zero(ws.k_eq, ws.m);
    ws.g = Eigen::VectorXd::Zero(ws.k_eq);
    for (int r = 0; r < ws.k_eq; ++r) {
      const auto& row = program.equalities()[r];
      ws.g(r) = row.rhs;
      for (const auto& [slot, c] : row.terms) ws.G(r, slot) += c;
    }
  }
  for (const auto& raw : program.blocks()) {
    ws.blocks.push_back(preprocess_block(raw));
    ws.total_dim += raw.dim;
  }

  // Scale-aware cold start.
  Iterate it;
  it.y = Eigen::VectorXd::Zero(ws.m);
  it.nu = Eigen::VectorXd::Zero(ws.k_eq);
  it.S.resize(ws.blocks.size());
  it.W.resize(ws.blocks.size());
  for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
    const double f0_scale = ws.blocks[k].F0.cwiseAbs().maxCoeff();
    const double s0 = std::max(10.0, 2.0 * f0_scale);
    it.S[k] = s0 * Eigen::MatrixXd::Identity(ws.blocks[k].dim, ws.blocks[k].dim);
    it.W[k] = s0 * Eigen::MatrixXd::Identity(ws.blocks[k].dim, ws.blocks[k].dim);
  }

  SolveOutcome out;
  out.y = it.y;

  std::vector<Eigen::MatrixXd> Sinv(ws.blocks.size());
  std::vector<Eigen::LLT<Eigen::MatrixXd>> Sllt(ws.blocks.size());
  std::vector<Eigen::LLT<Eigen::MatrixXd>> Wllt(ws.blocks.size());
  std::vector<Eigen::MatrixXd> dS_aff(ws.blocks.size());
  std::vector<Eigen::MatrixXd> dW_aff(ws.blocks.size());
  std::vector<Eigen::MatrixXd> dS(ws.blocks.size());
  std::vector<Eigen::MatrixXd> dW(ws.blocks.size());

  double best_progress = std::numeric_limits<double>::max();
  Iterate best = it;
  int stalled = 0;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    // Endgame slack refresh: once F(y) and S agree to high accuracy, snap S
    // onto F(y) so primal feasibility stops drifting with roundoff.
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
      const Eigen::MatrixXd fy = block_value(ws.blocks[k], it.y);
      const double drift = (fy - it.S[k]).cwiseAbs().maxCoeff();
      if (drift > 0.0 &&
          drift <= 1e-7 * (1.0 + ws.blocks[k].F0.cwiseAbs().maxCoeff())) {
        const Eigen::MatrixXd snapped = symmetrized(fy);
        if (Eigen::LLT<Eigen::MatrixXd>(snapped).info() == Eigen::Success) {
          it.S[k] = snapped;
        }
      }
    }
    Residuals res = compute_residuals(ws, it);
    out.iterations = iter;
    if (options.verbose) {
      std::printf("iter %3d  mu %9.2e  gap %9.2e  pinf %9.2e  dinf %9.2e\n",
                  iter, res.mu, res.rel_gap, res.p_infeas, res.d_infeas);
    }

    if (res.p_infeas <= options.feas_tol && res.d_infeas <= options.feas_tol &&
        res.rel_gap <= options.gap_tol) {
      out.status = SolveStatus::Optimal;
      best = it;
      break;
    }
    if (infeasibility_certificate(ws, it)) {
      out.status = SolveStatus::Infeasible;
      out.message = "dual ray certifies primal infeasibility";
      best = it;
      break;
    }
    if (res.p_infeas <= options.feas_tol && res.pobj < -1e10) {
      out.status = SolveStatus::Unbounded;
      out.message = "objective diverges on the feasible set";
      best = it;
      break;
    }

    // Track the best iterate so a rough endgame cannot destroy a good one.
    const double progress =
        std::max({res.rel_gap, res.p_infeas, res.d_infeas});
    if (progress < best_progress) best = it;
    if (progress < 0.99 * best_progress) {
      best_progress = std::min(best_progress, progress);
      stalled = 0;
    } else if (++stalled > 15) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "no progress over 15 iterations";
      break;
    }
    best_progress = std::min(best_progress, progress);

    bool factor_ok = true;
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
      Sllt[k].compute(it.S[k]);
      Wllt[k].compute(it.W[k]);
      if (Sllt[k].info() != Eigen::Success ||
          Wllt[k].info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      Sinv[k] = Sllt[k].solve(
          Eigen::MatrixXd::Identity(ws.blocks[k].dim, ws.blocks[k].dim));
      Sinv[k] = symmetrized(Sinv[k]);
    }
    if (!factor_ok) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "iterate left the cone";
      break;
    }

    // Schur complement of the KKT system.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ws.m, ws.m);
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
      accumulate_schur(ws.blocks[k], it.W[k], Sinv[k], M, exec);
    }
    M = symmetrized(M);
    // The Gram matrix is positive definite in exact arithmetic; add the
    // smallest diagonal shift that lets the factorization go through.
    Eigen::LLT<Eigen::MatrixXd> Mllt(M);
    for (double rel = 1e-14; Mllt.info() != Eigen::Success && rel < 1e-3;
         rel *= 1e3) {
      Eigen::MatrixXd Mreg = M;
      Mreg.diagonal().array() += rel * std::max(1.0, M.diagonal().maxCoeff());
      Mllt.compute(Mreg);
    }
    if (Mllt.info() != Eigen::Success) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "KKT Schur complement not positive definite";
      break;
    }
    Eigen::MatrixXd eq_schur;
    Eigen::LLT<Eigen::MatrixXd> eqllt;
    if (ws.k_eq > 0) {
      eq_schur = ws.G * Mllt.solve(ws.G.transpose());
      eq_schur = symmetrized(eq_schur);
      eqllt.compute(eq_schur);
      for (double rel = 1e-14; eqllt.info() != Eigen::Success && rel < 1e-3;
           rel *= 1e3) {
        Eigen::MatrixXd Ereg = eq_schur;
        Ereg.diagonal().array() +=
            rel * std::max(1.0, eq_schur.diagonal().maxCoeff());
        eqllt.compute(Ereg);
      }
      if (eqllt.info() != Eigen::Success) {
        out.status = SolveStatus::NumericalFailure;
        out.message = "equality Schur complement not positive definite";
        break;
      }
    }

    // One Newton direction for a given centering target; the corrector pair
    // (Caff per block) enters the complementarity right-hand side.
    Eigen::VectorXd dy(ws.m), dnu(ws.k_eq);
    auto newton_direction = [&](double sigma_mu, bool with_corrector,
                                std::vector<Eigen::MatrixXd>& dS_out,
                                std::vector<Eigen::MatrixXd>& dW_out) {
      Eigen::VectorXd h = Eigen::VectorXd::Zero(ws.m);
      // Centering part of the complementarity rhs; the Rd part of dS is
      // folded into h here and recovered through the full dS below.
      std::vector<Eigen::MatrixXd> center(ws.blocks.size());
      for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
        Eigen::MatrixXd R = -it.W[k];
        if (sigma_mu != 0.0) R += sigma_mu * Sinv[k];
        if (with_corrector) R -= dW_aff[k] * dS_aff[k] * Sinv[k];
        center[k] = symmetrized(R);
        const Eigen::MatrixXd known =
            center[k] - symmetrized(it.W[k] * res.Rd[k] * Sinv[k]);
        accumulate_inner_products(ws.blocks[k], known, h);
      }
      // One round of iterative refinement keeps the stationarity residual
      // from flooring out when the Schur complement turns ill-conditioned
      // near the solution.
      const auto refined_solve = [&](const Eigen::VectorXd& rhs) {
        Eigen::VectorXd x = Mllt.solve(rhs);
        x += Mllt.solve(rhs - M * x);
        return x;
      };
      const Eigen::VectorXd rhs_y = h - res.r_stat;
      if (ws.k_eq > 0) {
        const Eigen::VectorXd tmp = refined_solve(rhs_y);
        dnu = eqllt.solve(res.r_eq - ws.G * tmp);
        dnu += eqllt.solve(res.r_eq - ws.G * tmp - eq_schur * dnu);
        dy = refined_solve(rhs_y + ws.G.transpose() * dnu);
      } else {
        dy = refined_solve(rhs_y);
      }
      for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
        dS_out[k] = block_direction(ws.blocks[k], dy) + res.Rd[k];
        dW_out[k] =
            center[k] - symmetrized(it.W[k] * dS_out[k] * Sinv[k]);
      }
    };

    // Predictor.
    newton_direction(0.0, false, dS_aff, dW_aff);
    double ap = 1.0, ad = 1.0;
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
      ap = std::min(ap, max_step(Sllt[k], dS_aff[k], 1.0));
      ad = std::min(ad, max_step(Wllt[k], dW_aff[k], 1.0));
    }
    double gap_aff = 0.0;
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
      gap_aff += (it.S[k] + ap * dS_aff[k])
                     .cwiseProduct(it.W[k] + ad * dW_aff[k])
                     .sum();
    }
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / res.gap, 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector.
    newton_direction(sigma * res.mu, true, dS, dW);
    // Take slightly conservative steps once the endgame starts; the step
    // bound itself is eigenvalue-based and exact only in exact arithmetic.
    const double tau = progress < 1e-5 ? 0.95 : 0.98;
    ap = 1.0;
    ad = 1.0;
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
      ap = std::min(ap, max_step(Sllt[k], dS[k], 1.0 / tau));
      ad = std::min(ad, max_step(Wllt[k], dW[k], 1.0 / tau));
    }
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);

    // Validate the step before committing: roundoff can defeat the
    // eigenvalue-based step bound right at the cone boundary.
    bool stepped = false;
    for (int tries = 0; tries < 8 && !stepped; ++tries) {
      stepped = true;
      for (std::size_t k = 0; k < ws.blocks.size() && stepped; ++k) {
        const Eigen::MatrixXd Sc = symmetrized(it.S[k] + ap * dS[k]);
        const Eigen::MatrixXd Wc = symmetrized(it.W[k] + ad * dW[k]);
        if (Eigen::LLT<Eigen::MatrixXd>(Sc).info() != Eigen::Success ||
            Eigen::LLT<Eigen::MatrixXd>(Wc).info() != Eigen::Success) {
          stepped = false;
        }
      }
      if (!stepped) {
        ap *= 0.7;
        ad *= 0.7;
      }
    }
    if (!stepped) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "no admissible step at the cone boundary";
      break;
    }
    // Quality control: near degeneracy the Newton direction can be garbage;
    // a step that sharply worsens the KKT composite ends the run on the
    // best iterate instead of being committed.
    {
      Iterate cand = it;
      cand.y += ap * dy;
      if (ws.k_eq > 0) cand.nu += ad * dnu;
      for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
        cand.S[k] = symmetrized(cand.S[k] + ap * dS[k]);
        cand.W[k] = symmetrized(cand.W[k] + ad * dW[k]);
      }
      const Residuals cres = compute_residuals(ws, cand);
      const double cprog =
          std::max({cres.rel_gap, cres.p_infeas, cres.d_infeas});
      if (cprog > 10.0 * std::max(progress, 1e2 * options.gap_tol)) {
        out.status = SolveStatus::NumericalFailure;
        out.message = "endgame step rejected; returning best iterate";
        break;
      }
      it = std::move(cand);
    }

    if (iter + 1 == options.max_iters) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "iteration limit reached";
    }
  }

  // Report from the best iterate seen; a failed endgame may still leave a
  // point meeting the requested tolerances, and a stalled run may still
  // carry a (looser) infeasibility ray.
  const Residuals res = compute_residuals(ws, best);
  if (out.status == SolveStatus::NumericalFailure &&
      res.p_infeas <= options.feas_tol && res.d_infeas <= options.feas_tol &&
      res.rel_gap <= options.gap_tol) {
    out.status = SolveStatus::Optimal;
    out.message = "converged before endgame roundoff; best iterate returned";
  }
  if (out.status == SolveStatus::NumericalFailure &&
      (infeasibility_certificate(ws, it, 1e-6) ||
       infeasibility_certificate(ws, best, 1e-6))) {
    out.status = SolveStatus::Infeasible;
    out.message = "stalled with an approximate dual infeasibility ray";
  }
  out.y = best.y;
  out.objective = res.pobj * b_scale;
  out.dual_objective = res.dobj * b_scale;
  out.gap = res.gap * b_scale;
  out.rel_gap = res.rel_gap;
  out.max_eq_violation =
      ws.k_eq > 0 ? (ws.G * best.y - ws.g).cwiseAbs().maxCoeff() : 0.0;
  double viol = 0.0;
  for (const auto& blk : ws.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        block_value(blk, best.y), Eigen::EigenvaluesOnly);
    viol = std::max(viol, -es.eigenvalues().minCoeff());
  }
  out.max_psd_violation = std::max(0.0, viol);
  return out;
}

}  // namespace ringflow::sdp
