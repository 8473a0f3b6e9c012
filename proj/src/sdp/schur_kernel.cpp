#include "ringflow/sdp/schur_kernel.hpp"

#include <map>

namespace ringflow::sdp {

BlockData preprocess_block(const ConicProgram::Block& raw) {
  BlockData blk;
  blk.dim = raw.dim;
  blk.F0 = Eigen::MatrixXd::Zero(raw.dim, raw.dim);
  for (const auto& e : raw.f0) {
    blk.F0(e.i, e.j) += e.value;
    if (e.i != e.j) blk.F0(e.j, e.i) += e.value;
  }

  // Coalesce duplicate coefficient entries, then expand both halves.
  std::map<int, std::map<std::pair<int, int>, double>> per_slot;
  for (const auto& e : raw.coeffs) {
    const int i = std::min(e.i, e.j);
    const int j = std::max(e.i, e.j);
    per_slot[e.slot][{i, j}] += e.value;
  }
  for (const auto& [slot, entries] : per_slot) {
    BlockData::Var var;
    var.slot = slot;
    for (const auto& [ij, v] : entries) {
      if (v == 0.0) continue;
      var.row.push_back(ij.first);
      var.col.push_back(ij.second);
      var.val.push_back(v);
      if (ij.first != ij.second) {
        var.row.push_back(ij.second);
        var.col.push_back(ij.first);
        var.val.push_back(v);
      }
    }
    if (!var.val.empty()) blk.vars.push_back(std::move(var));
  }
  return blk;
}

Eigen::MatrixXd block_value(const BlockData& blk, const Eigen::VectorXd& y) {
  Eigen::MatrixXd F = blk.F0;
  for (const auto& v : blk.vars) {
    const double yv = y(v.slot);
    for (std::size_t t = 0; t < v.val.size(); ++t) {
      F(v.row[t], v.col[t]) += yv * v.val[t];
    }
  }
  return F;
}

Eigen::MatrixXd block_direction(const BlockData& blk,
                                const Eigen::VectorXd& dy) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(blk.dim, blk.dim);
  for (const auto& v : blk.vars) {
    const double yv = dy(v.slot);
    for (std::size_t t = 0; t < v.val.size(); ++t) {
      D(v.row[t], v.col[t]) += yv * v.val[t];
    }
  }
  return D;
}

void accumulate_inner_products(const BlockData& blk, const Eigen::MatrixXd& R,
                               Eigen::VectorXd& out) {
  for (const auto& v : blk.vars) {
    double acc = 0.0;
    for (std::size_t t = 0; t < v.val.size(); ++t) {
      acc += v.val[t] * R(v.row[t], v.col[t]);
    }
    out(v.slot) += acc;
  }
}

namespace {

// One column of the block's Schur contribution: for variable b, form
// C = W F_b Sinv (exploiting that F_b touches few columns), then take
// <F_a, C> against every active variable a.
void schur_column(const BlockData& blk, const Eigen::MatrixXd& W,
                  const Eigen::MatrixXd& Sinv, std::size_t b,
                  Eigen::MatrixXd& C, Eigen::MatrixXd& M) {
  const auto& vb = blk.vars[b];
  C.setZero();
  // B := W * F_b has nonzero columns only where F_b has entries.
  // C := B * Sinv accumulated per such column as an outer product.
  for (std::size_t t = 0; t < vb.val.size(); ++t) {
    C.noalias() += (vb.val[t] * W.col(vb.row[t])) * Sinv.row(vb.col[t]);
  }
  const int col_slot = vb.slot;
  for (const auto& va : blk.vars) {
    double acc = 0.0;
    for (std::size_t t = 0; t < va.val.size(); ++t) {
      // Tr(F_a C) walks C transposed relative to F_a's entries.
      acc += va.val[t] * C(va.col[t], va.row[t]);
    }
    M(va.slot, col_slot) += acc;
  }
}

}  // namespace

void accumulate_schur_serial(const BlockData& blk, const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& M) {
  Eigen::MatrixXd C(blk.dim, blk.dim);
  for (std::size_t b = 0; b < blk.vars.size(); ++b) {
    schur_column(blk, W, Sinv, b, C, M);
  }
}

void accumulate_schur_parallel(const BlockData& blk, const Eigen::MatrixXd& W,
                               const Eigen::MatrixXd& Sinv,
                               Eigen::MatrixXd& M) {
  const auto count = static_cast<std::ptrdiff_t>(blk.vars.size());
#pragma omp parallel
  {
    Eigen::MatrixXd C(blk.dim, blk.dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < count; ++b) {
      // Distinct b writes a distinct slot column of M: no races, and each
      // entry is produced by the same instruction sequence as the serial
      // reference.
      schur_column(blk, W, Sinv, static_cast<std::size_t>(b), C, M);
    }
  }
}

void accumulate_schur(const BlockData& blk, const Eigen::MatrixXd& W,
                      const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& M,
                      ExecPolicy exec) {
  if (exec == ExecPolicy::Parallel) {
    accumulate_schur_parallel(blk, W, Sinv, M);
  } else {
    accumulate_schur_serial(blk, W, Sinv, M);
  }
}

}  // namespace ringflow::sdp
