#pragma once

#include "fimgnn/matrix.hpp"

namespace fimgnn {

/// Student-t (one degree of freedom) soft assignment of embeddings to centers; rows sum to 1.
Matrix soft_assign(const Matrix& z, const Matrix& centers);

/// sum_jk p log(p/q), with 0 log 0 = 0. Rows of p and q must index the same samples.
double kl_loss(const Matrix& p, const Matrix& q);

/// KL(P || soft_assign(Z, U)) with gradients w.r.t. Z and U when requested.
double clustering_loss(const Matrix& p, const Matrix& z, const Matrix& centers,
                       Matrix* grad_z = nullptr, Matrix* grad_centers = nullptr);

}  // namespace fimgnn
