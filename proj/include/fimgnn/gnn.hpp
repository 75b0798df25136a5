#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fimgnn/matrix.hpp"
#include "fimgnn/random.hpp"
#include "fimgnn/sparse.hpp"

namespace fimgnn {

enum class EncoderKind { Gcn, Gat };
enum class OutputActivation { Linear, Softmax };

std::string_view to_string(EncoderKind kind) noexcept;
std::string_view to_string(OutputActivation act) noexcept;

// Features plus the graph operators both encoders need, prepared once per graph.
struct GraphBatch {
  Matrix features;
  /// Binary adjacency, zero diagonal.
  CsrMatrix adjacency;
  /// D^{-1/2}(A+I)D^{-1/2}
  CsrMatrix normalized;
  /// A + I; attention neighbourhoods.
  CsrMatrix neighborhoods;
  /// normalized * features; constant across epochs.
  Matrix propagated;

  static GraphBatch make(Matrix features, CsrMatrix adjacency);
  std::size_t num_nodes() const noexcept { return features.rows(); }
};

// Two-layer GCN: act(Â ReLU(Â X W0) W1).
struct GcnEncoder {
  Matrix w0;
  Matrix w1;
  OutputActivation output = OutputActivation::Linear;

  static GcnEncoder glorot(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                           OutputActivation output, Rng& rng);
};

// Two-layer single-head GAT. Attention vectors are 1 x 2d: [source half | neighbour half].
// Layer 1 uses ELU, layer 2 is linear.
struct GatEncoder {
  Matrix w0;
  Matrix a0;
  Matrix w1;
  Matrix a1;

  static GatEncoder glorot(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, Rng& rng);
};

inline constexpr double kAttentionSlope = 0.2;

struct GcnCache {
  Matrix pre_hidden;  // Â X W0
  Matrix hidden;      // ReLU(pre_hidden)
  Matrix propagated_hidden;  // Â hidden
  Matrix output;
};

struct GatLayerCache {
  Matrix projected;            // H W
  std::vector<double> score;   // pre-LeakyReLU logit per edge of `neighborhoods`
  std::vector<double> alpha;   // attention per edge
  Matrix aggregated;           // sum_k alpha_jk (HW)_k
};

struct GatCache {
  GatLayerCache layer0;
  Matrix hidden;  // ELU(layer0.aggregated)
  GatLayerCache layer1;
};

Matrix gcn_forward(const GcnEncoder& enc, const GraphBatch& graph, GcnCache* cache = nullptr);
/// Gradients {dW0, dW1} for an upstream gradient on the output embeddings.
std::vector<Matrix> gcn_backward(const GcnEncoder& enc, const GraphBatch& graph,
                                 const GcnCache& cache, const Matrix& grad_output);

Matrix gat_forward(const GatEncoder& enc, const GraphBatch& graph, GatCache* cache = nullptr);
/// Gradients {dW0, da0, dW1, da1}.
std::vector<Matrix> gat_backward(const GatEncoder& enc, const GraphBatch& graph,
                                 const GatCache& cache, const Matrix& grad_output);

/// Attention coefficients of one GAT layer as a sparse matrix over `neighborhoods`.
CsrMatrix attention_matrix(const GatLayerCache& layer, const CsrMatrix& neighborhoods);

/// sigmoid(Z Z^T)
Matrix decode_adjacency(const Matrix& z);

/// Positive-class weight (n^2 - nnz) / nnz, capped at n^2 for an empty target.
double positive_weight(std::size_t n, std::size_t nnz) noexcept;

/// Weighted mean binary cross-entropy between a 0/1 target and probabilities in (0,1).
double reconstruction_loss(const Matrix& target, const Matrix& reconstructed);

/// Same loss evaluated from embeddings through the logits Z Z^T, with dL/dZ when requested.
/// Target is binary and given sparsely.
double reconstruction_loss_from_embeddings(const CsrMatrix& target, const Matrix& z,
                                           Matrix* grad_z = nullptr);

}  // namespace fimgnn
