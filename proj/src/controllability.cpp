#include "ringflow/controllability.hpp"

#include <algorithm>
#include <cmath>

namespace ringflow {

namespace {

int complex_rank(const Eigen::MatrixXcd& M, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cutoff = tol * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

/// Greedy clustering of eigenvalues by absolute distance.
std::vector<std::complex<double>> cluster_eigenvalues(
    const Eigen::VectorXcd& eigs, double cluster_tol) {
  std::vector<std::complex<double>> sorted(eigs.data(),
                                           eigs.data() + eigs.size());
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<std::complex<double>> reps;
  std::vector<int> counts;
  for (const auto& z : sorted) {
    bool merged = false;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      if (std::abs(z - reps[k]) <= cluster_tol) {
        // Running mean keeps the representative centered on the cluster.
        reps[k] = (reps[k] * static_cast<double>(counts[k]) + z) /
                  static_cast<double>(counts[k] + 1);
        ++counts[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      reps.push_back(z);
      counts.push_back(1);
    }
  }
  return reps;
}

}  // namespace

int numerical_rank(const Eigen::MatrixXd& M, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cutoff = tol * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

LinearHdvCoeffs default_cav_coeffs(const RingModel& m) {
  LinearHdvCoeffs mean{0.0, 0.0, 0.0};
  for (const auto& c : m.hdv_coeffs) {
    mean.a1 += c.a1;
    mean.a2 += c.a2;
    mean.a3 += c.a3;
  }
  const double k = static_cast<double>(m.hdv_coeffs.size());
  mean.a1 /= k;
  mean.a2 /= k;
  mean.a3 /= k;
  mean.validate();
  return mean;
}

Eigen::MatrixXd transform_to_hat(const RingModel& m,
                                 const LinearHdvCoeffs& cav_coeffs) {
  cav_coeffs.validate();
  Eigen::MatrixXd ahat = m.A;
  // The CAV velocity row becomes a human-like row so the whole ring shares
  // one block structure; controllability of (A, B) is invariant under this
  // state feedback through B.
  const int last_vel = 2 * m.n - 1;
  ahat(1, 0) = cav_coeffs.a1;
  ahat(1, 1) = -cav_coeffs.a2;
  ahat(1, last_vel) = cav_coeffs.a3;
  return ahat;
}

std::vector<std::complex<double>> uncontrollable_eigenvalues(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
    const PbhOptions& opt) {
  const int d = static_cast<int>(A.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) {
    throw NumericalFailureError("eigensolver failed on the PBH pencil base");
  }
  const auto reps = cluster_eigenvalues(es.eigenvalues(), opt.cluster_tol);

  std::vector<std::complex<double>> deficient;
  Eigen::MatrixXcd pencil(d, d + B.cols());
  for (const auto& lambda : reps) {
    pencil.leftCols(d) =
        lambda * Eigen::MatrixXcd::Identity(d, d) - A.cast<std::complex<double>>();
    pencil.rightCols(B.cols()) = B.cast<std::complex<double>>();
    if (complex_rank(pencil, opt.rank_tol) < d) deficient.push_back(lambda);
  }
  return deficient;
}

PbhReport pbh_analysis(const RingModel& m, const LinearHdvCoeffs& cav_coeffs,
                       double rank_tol) {
  if (!(rank_tol > 0.0)) throw DomainError("rank tolerance must be positive");
  PbhOptions opt;
  opt.rank_tol = rank_tol;

  const Eigen::MatrixXd ahat = transform_to_hat(m, cav_coeffs);
  const int d = m.state_dim();

  PbhReport report;
  Eigen::EigenSolver<Eigen::MatrixXd> es(ahat);
  if (es.info() != Eigen::Success) {
    throw NumericalFailureError("eigensolver failed on the transformed ring");
  }
  report.eigenvalues = es.eigenvalues();

  // PBH test per clustered eigenvalue. Most eigenvalues only need the
  // singular values; the left null vectors are extracted in a second pass
  // over the (rare) deficient ones.
  const auto reps = cluster_eigenvalues(report.eigenvalues, opt.cluster_tol);
  Eigen::MatrixXcd pencil(d, d + 1);
  for (const auto& lambda : reps) {
    pencil.leftCols(d) = lambda * Eigen::MatrixXcd::Identity(d, d) -
                         ahat.cast<std::complex<double>>();
    pencil.rightCols(1) = m.B.cast<std::complex<double>>();
    {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
      const auto& s = svd.singularValues();
      if (s.minCoeff() > opt.rank_tol * s(0)) continue;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    const double cutoff = opt.rank_tol * s(0);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s(k) > cutoff) continue;
      UncontrollableMode mode;
      mode.eigenvalue = lambda;
      mode.left_vector = svd.matrixU().col(k);
      // A real eigenvalue admits a real mode vector; rotate the phase so the
      // largest entry is real and positive.
      Eigen::Index imax = 0;
      mode.left_vector.cwiseAbs().maxCoeff(&imax);
      mode.left_vector *=
          std::conj(mode.left_vector(imax)) / std::abs(mode.left_vector(imax));
      report.uncontrollable_modes.push_back(std::move(mode));
    }
  }
  report.is_controllable = report.uncontrollable_modes.empty();

  // Jordan structure of the zero eigenvalue from the kernel chain.
  report.dim_ker = d - numerical_rank(ahat, opt.rank_tol);
  report.dim_ker_sq =
      d - numerical_rank(Eigen::MatrixXd(ahat * ahat), opt.rank_tol);
  if (report.dim_ker == 0) {
    report.zero_mode_multiplicity = 0;
  } else if (report.dim_ker_sq == report.dim_ker) {
    // Kernel chain already stationary: no Jordan block of size >= 2, so the
    // algebraic multiplicity equals the geometric one.
    report.zero_mode_multiplicity = report.dim_ker;
  } else {
    // The kernel of A_hat^2 can be numerically delicate. The coefficient sums
    // sum_i (a_i3 - a_i2)/a_i1 < 0 rule out longer chains analytically, in
    // which case the SVD verdict on A_hat^2 is spurious.
    double coeff_sum = (cav_coeffs.a3 - cav_coeffs.a2) / cav_coeffs.a1;
    for (const auto& c : m.hdv_coeffs) coeff_sum += (c.a3 - c.a2) / c.a1;
    if (coeff_sum < 0.0) {
      report.zero_mode_multiplicity = report.dim_ker;
    } else {
      // Walk the kernel chain until it stabilizes.
      Eigen::MatrixXd power = ahat * ahat;
      int prev = report.dim_ker_sq;
      int mult = prev;
      for (int k = 3; k <= d; ++k) {
        power = power * ahat;
        const int cur = d - numerical_rank(power, opt.rank_tol);
        if (cur == prev) break;
        mult = cur;
        prev = cur;
      }
      report.zero_mode_multiplicity = mult;
    }
  }

  // Stabilizable when every uncontrollable mode is stable; the structural
  // zero counts as stable only while it stays simple.
  report.is_stabilizable = true;
  for (const auto& mode : report.uncontrollable_modes) {
    const bool at_zero = std::abs(mode.eigenvalue) <= opt.cluster_tol;
    const bool strictly_stable = mode.eigenvalue.real() < -opt.cluster_tol;
    const bool marginal_ok = at_zero && report.zero_mode_multiplicity == 1;
    if (!strictly_stable && !marginal_ok) report.is_stabilizable = false;
  }

  std::vector<LinearHdvCoeffs> all = m.hdv_coeffs;
  all.insert(all.begin(), cav_coeffs);
  report.condition_14 = check_stabilizability_condition(all);
  return report;
}

bool check_stabilizability_condition(
    const std::vector<LinearHdvCoeffs>& all_coeffs, double rel_tol) {
  if (all_coeffs.size() < 2) {
    throw ValidationError("stabilizability condition needs >= 2 vehicles");
  }
  for (const auto& ci : all_coeffs) {
    for (const auto& cj : all_coeffs) {
      const double expr =
          cj.a1 * cj.a1 - ci.a2 * cj.a1 * cj.a3 + ci.a1 * cj.a3 * cj.a3;
      const double scale =
          cj.a1 * cj.a1 + ci.a2 * cj.a1 * cj.a3 + ci.a1 * cj.a3 * cj.a3;
      if (std::abs(expr) <= rel_tol * scale) return false;
    }
  }
  return true;
}

bool verify_eigenvalue_condition(
    const std::vector<LinearHdvCoeffs>& all_coeffs,
    std::complex<double> lambda, double abs_tol) {
  if (lambda == std::complex<double>(0.0, 0.0)) {
    throw DomainError("eigenvalue condition is defined for nonzero lambda");
  }
  for (const auto& c : all_coeffs) {
    if (std::abs(lambda * lambda + c.a2 * lambda + c.a1) <= abs_tol) {
      return false;
    }
    if (std::abs(c.a3 * lambda + c.a2) <= abs_tol) return false;
  }
  return true;
}

int kalman_controllability_rank(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& B, double rank_tol) {
  const int d = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  Eigen::MatrixXd ctrb(d, d * m);
  Eigen::MatrixXd block = B;
  for (int k = 0; k < d; ++k) {
    ctrb.middleCols(k * m, m) = block;
    block = A * block;
  }
  return numerical_rank(ctrb, rank_tol);
}

}  // namespace ringflow
