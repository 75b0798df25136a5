#pragma once

#include <cstddef>

#include "fimgnn/matrix.hpp"
#include "fimgnn/sparse.hpp"

namespace fimgnn {

/// Binary symmetric kNN graph under cosine similarity, symmetrized by OR, zero diagonal.
/// Ties go to the lower row index. Zero-norm rows pick no neighbours.
CsrMatrix knn_graph(const Matrix& features, std::size_t k);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
CsrMatrix normalize_adjacency(const CsrMatrix& adjacency);

/// A + I with unit weights; the neighbourhoods attended over by GAT layers.
CsrMatrix with_self_loops(const CsrMatrix& adjacency);

}  // namespace fimgnn
