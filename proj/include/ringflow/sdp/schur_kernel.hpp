#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ringflow/exec.hpp"
#include "ringflow/sdp/program.hpp"

namespace ringflow::sdp {

/// Preprocessed PSD block: the constant term as a dense matrix plus, per
/// active variable, the coefficient matrix as fully expanded triplets (both
/// symmetric halves present). This is the layout the hot Schur-complement
/// loop consumes.
struct BlockData {
  int dim = 0;
  Eigen::MatrixXd F0;
  struct Var {
    int slot;
    std::vector<int> row, col;
    std::vector<double> val;
  };
  std::vector<Var> vars;
};

BlockData preprocess_block(const ConicProgram::Block& raw);

/// Evaluates F(y) = F0 + sum y_i F_i for one block.
Eigen::MatrixXd block_value(const BlockData& blk, const Eigen::VectorXd& y);

/// Accumulates the interior-point Schur complement contribution of one
/// block, M(a, b) += Tr(F_a W F_b Sinv), over all active variable pairs.
/// The parallel variant splits work over the right-hand variable index and
/// is bit-identical to the serial reference.
void accumulate_schur_serial(const BlockData& blk, const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& M);
void accumulate_schur_parallel(const BlockData& blk, const Eigen::MatrixXd& W,
                               const Eigen::MatrixXd& Sinv,
                               Eigen::MatrixXd& M);
void accumulate_schur(const BlockData& blk, const Eigen::MatrixXd& W,
                      const Eigen::MatrixXd& Sinv, Eigen::MatrixXd& M,
                      ExecPolicy exec);

/// <F_i, R> for every active variable of the block, accumulated into out.
void accumulate_inner_products(const BlockData& blk, const Eigen::MatrixXd& R,
                               Eigen::VectorXd& out);

/// y-direction content of the block: sum_i dy_i F_i as a dense matrix.
Eigen::MatrixXd block_direction(const BlockData& blk,
                                const Eigen::VectorXd& dy);

}  // namespace ringflow::sdp
