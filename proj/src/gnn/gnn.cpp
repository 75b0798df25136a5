#include "fimgnn/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fimgnn/errors.hpp"
#include "fimgnn/graph.hpp"

namespace fimgnn {

namespace {

Matrix glorot_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

void check_input(const Matrix& w0, const GraphBatch& graph, const char* who) {
  if (graph.features.cols() != w0.rows()) {
    throw ShapeError(std::string(who) + ": feature dim " + std::to_string(graph.features.cols()) +
                     " != encoder input dim " + std::to_string(w0.rows()));
  }
}

// One single-head attention layer over `nbrs` (self-loops included).
Matrix attention_forward(const Matrix& input, const Matrix& w, const Matrix& a,
                         const CsrMatrix& nbrs, GatLayerCache& cache) {
  const std::size_t n = input.rows();
  const std::size_t d = w.cols();
  if (a.rows() != 1 || a.cols() != 2 * d) throw ShapeError("gat: attention vector must be 1 x 2d");
  cache.projected = matmul(input, w);
  const Matrix& g = cache.projected;

  std::vector<double> self_term(n), nbr_term(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto gj = g.row(j);
    double s = 0.0, t = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      s += a(0, c) * gj[c];
      t += a(0, d + c) * gj[c];
    }
    self_term[j] = s;
    nbr_term[j] = t;
  }

  cache.score.assign(nbrs.nnz(), 0.0);
  cache.alpha.assign(nbrs.nnz(), 0.0);
  cache.aggregated = Matrix(n, d);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t begin = nbrs.row_begin(j), end = nbrs.row_end(j);
    if (begin == end) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t e = begin; e < end; ++e) {
      const double s = self_term[j] + nbr_term[nbrs.col(e)];
      cache.score[e] = s;
      const double logit = s > 0.0 ? s : kAttentionSlope * s;
      cache.alpha[e] = logit;
      mx = std::max(mx, logit);
    }
    double total = 0.0;
    for (std::size_t e = begin; e < end; ++e) {
      cache.alpha[e] = std::exp(cache.alpha[e] - mx);
      total += cache.alpha[e];
    }
    auto out = cache.aggregated.row(j);
    for (std::size_t e = begin; e < end; ++e) {
      cache.alpha[e] /= total;
      auto gk = g.row(nbrs.col(e));
      for (std::size_t c = 0; c < d; ++c) out[c] += cache.alpha[e] * gk[c];
    }
  }
  return cache.aggregated;
}

// Returns dInput when `want_input_grad`; fills dW and dA.
Matrix attention_backward(const Matrix& input, const Matrix& w, const Matrix& a,
                          const CsrMatrix& nbrs, const GatLayerCache& cache,
                          const Matrix& grad_out, Matrix& grad_w, Matrix& grad_a,
                          bool want_input_grad) {
  const std::size_t n = input.rows();
  const std::size_t d = w.cols();
  const Matrix& g = cache.projected;
  Matrix grad_g(n, d);
  std::vector<double> grad_self(n, 0.0), grad_nbr(n, 0.0);
  std::vector<double> grad_alpha;

  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t begin = nbrs.row_begin(j), end = nbrs.row_end(j);
    auto go = grad_out.row(j);
    grad_alpha.assign(end - begin, 0.0);
    double weighted = 0.0;
    for (std::size_t e = begin; e < end; ++e) {
      const std::size_t k = nbrs.col(e);
      auto gk = g.row(k);
      auto dgk = grad_g.row(k);
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        dot += go[c] * gk[c];
        dgk[c] += cache.alpha[e] * go[c];
      }
      grad_alpha[e - begin] = dot;
      weighted += cache.alpha[e] * dot;
    }
    for (std::size_t e = begin; e < end; ++e) {
      const double grad_logit = cache.alpha[e] * (grad_alpha[e - begin] - weighted);
      const double grad_score = cache.score[e] > 0.0 ? grad_logit : kAttentionSlope * grad_logit;
      grad_self[j] += grad_score;
      grad_nbr[nbrs.col(e)] += grad_score;
    }
  }

  grad_a = Matrix(1, 2 * d);
  for (std::size_t j = 0; j < n; ++j) {
    auto gj = g.row(j);
    auto dgj = grad_g.row(j);
    for (std::size_t c = 0; c < d; ++c) {
      grad_a(0, c) += grad_self[j] * gj[c];
      grad_a(0, d + c) += grad_nbr[j] * gj[c];
      dgj[c] += grad_self[j] * a(0, c) + grad_nbr[j] * a(0, d + c);
    }
  }
  grad_w = matmul_tn(input, grad_g);
  return want_input_grad ? matmul_nt(grad_g, w) : Matrix{};
}

}  // namespace

std::string_view to_string(EncoderKind kind) noexcept {
  return kind == EncoderKind::Gcn ? "gcn" : "gat";
}

std::string_view to_string(OutputActivation act) noexcept {
  return act == OutputActivation::Linear ? "linear" : "softmax";
}

GraphBatch GraphBatch::make(Matrix features, CsrMatrix adjacency) {
  if (adjacency.rows() != features.rows() || adjacency.cols() != features.rows()) {
    throw ShapeError("graph batch: adjacency is " + std::to_string(adjacency.rows()) + "x" +
                     std::to_string(adjacency.cols()) + " for " +
                     std::to_string(features.rows()) + " nodes");
  }
  GraphBatch g;
  g.normalized = normalize_adjacency(adjacency);
  g.neighborhoods = with_self_loops(adjacency);
  g.propagated = g.normalized.multiply(features);
  g.features = std::move(features);
  g.adjacency = std::move(adjacency);
  return g;
}

GcnEncoder GcnEncoder::glorot(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                              OutputActivation output, Rng& rng) {
  if (in_dim == 0 || hidden == 0 || out_dim == 0) throw ShapeError("gcn: dimensions must be positive");
  GcnEncoder enc;
  enc.w0 = glorot_matrix(in_dim, hidden, rng);
  enc.w1 = glorot_matrix(hidden, out_dim, rng);
  enc.output = output;
  return enc;
}

GatEncoder GatEncoder::glorot(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, Rng& rng) {
  if (in_dim == 0 || hidden == 0 || out_dim == 0) throw ShapeError("gat: dimensions must be positive");
  GatEncoder enc;
  enc.w0 = glorot_matrix(in_dim, hidden, rng);
  enc.a0 = glorot_matrix(1, 2 * hidden, rng);
  enc.w1 = glorot_matrix(hidden, out_dim, rng);
  enc.a1 = glorot_matrix(1, 2 * out_dim, rng);
  return enc;
}

Matrix gcn_forward(const GcnEncoder& enc, const GraphBatch& graph, GcnCache* cache) {
  check_input(enc.w0, graph, "gcn_forward");
  if (enc.w1.rows() != enc.w0.cols()) throw ShapeError("gcn_forward: W1 rows != W0 cols");
  GcnCache local;
  GcnCache& c = cache ? *cache : local;
  c.pre_hidden = matmul(graph.propagated, enc.w0);
  c.hidden = c.pre_hidden;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) c.hidden.data()[i] = std::max(0.0, c.hidden.data()[i]);
  c.propagated_hidden = graph.normalized.multiply(c.hidden);
  c.output = matmul(c.propagated_hidden, enc.w1);
  if (enc.output == OutputActivation::Softmax) softmax_rows(c.output);
  return c.output;
}

std::vector<Matrix> gcn_backward(const GcnEncoder& enc, const GraphBatch& graph,
                                 const GcnCache& cache, const Matrix& grad_output) {
  require_same_shape(grad_output, cache.output, "gcn_backward");
  Matrix grad_pre = grad_output;
  if (enc.output == OutputActivation::Softmax) {
    for (std::size_t r = 0; r < grad_pre.rows(); ++r) {
      auto z = cache.output.row(r);
      auto gz = grad_pre.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < z.size(); ++c) dot += z[c] * gz[c];
      for (std::size_t c = 0; c < z.size(); ++c) gz[c] = z[c] * (gz[c] - dot);
    }
  }
  Matrix grad_w1 = matmul_tn(cache.propagated_hidden, grad_pre);
  Matrix grad_hidden = graph.normalized.multiply_transposed(matmul_nt(grad_pre, enc.w1));
  for (std::size_t i = 0; i < grad_hidden.size(); ++i)
    if (!(cache.pre_hidden.data()[i] > 0.0)) grad_hidden.data()[i] = 0.0;
  Matrix grad_w0 = matmul_tn(graph.propagated, grad_hidden);
  return {std::move(grad_w0), std::move(grad_w1)};
}

Matrix gat_forward(const GatEncoder& enc, const GraphBatch& graph, GatCache* cache) {
  check_input(enc.w0, graph, "gat_forward");
  if (enc.w1.rows() != enc.w0.cols()) throw ShapeError("gat_forward: W1 rows != W0 cols");
  GatCache local;
  GatCache& c = cache ? *cache : local;
  attention_forward(graph.features, enc.w0, enc.a0, graph.neighborhoods, c.layer0);
  c.hidden = c.layer0.aggregated;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) {
    double& v = c.hidden.data()[i];
    if (v <= 0.0) v = std::expm1(v);
  }
  return attention_forward(c.hidden, enc.w1, enc.a1, graph.neighborhoods, c.layer1);
}

std::vector<Matrix> gat_backward(const GatEncoder& enc, const GraphBatch& graph,
                                 const GatCache& cache, const Matrix& grad_output) {
  require_same_shape(grad_output, cache.layer1.aggregated, "gat_backward");
  std::vector<Matrix> grads(4);
  Matrix grad_hidden = attention_backward(cache.hidden, enc.w1, enc.a1, graph.neighborhoods,
                                          cache.layer1, grad_output, grads[2], grads[3], true);
  for (std::size_t i = 0; i < grad_hidden.size(); ++i) {
    const double pre = cache.layer0.aggregated.data()[i];
    if (pre <= 0.0) grad_hidden.data()[i] *= std::exp(pre);
  }
  attention_backward(graph.features, enc.w0, enc.a0, graph.neighborhoods, cache.layer0,
                     grad_hidden, grads[0], grads[1], false);
  return grads;
}

CsrMatrix attention_matrix(const GatLayerCache& layer, const CsrMatrix& neighborhoods) {
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  coords.reserve(neighborhoods.nnz());
  for (std::size_t r = 0; r < neighborhoods.rows(); ++r)
    for (std::size_t e = neighborhoods.row_begin(r); e < neighborhoods.row_end(r); ++e)
      coords.emplace_back(r, neighborhoods.col(e));
  return CsrMatrix::from_triplets(neighborhoods.rows(), neighborhoods.cols(), std::move(coords),
                                  layer.alpha);
}

Matrix decode_adjacency(const Matrix& z) {
  Matrix out = matmul_nt(z, z);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = sigmoid(out.data()[i]);
  return out;
}

double positive_weight(std::size_t n, std::size_t nnz) noexcept {
  const double total = static_cast<double>(n) * static_cast<double>(n);
  if (nnz == 0) return total;
  return (total - static_cast<double>(nnz)) / static_cast<double>(nnz);
}

double reconstruction_loss(const Matrix& target, const Matrix& reconstructed) {
  require_same_shape(target, reconstructed, "reconstruction_loss");
  if (target.empty()) return 0.0;
  std::size_t nnz = 0;
  for (double v : target.values()) nnz += v != 0.0;
  const double w = positive_weight(target.rows(), nnz);
  constexpr double kFloor = 1e-300;
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double p = reconstructed.data()[i];
    if (target.data()[i] != 0.0) {
      total -= w * std::log(std::max(p, kFloor));
    } else {
      total -= std::log(std::max(1.0 - p, kFloor));
    }
  }
  return total / static_cast<double>(target.size());
}

double reconstruction_loss_from_embeddings(const CsrMatrix& target, const Matrix& z, Matrix* grad_z) {
  const std::size_t n = z.rows();
  if (target.rows() != n || target.cols() != n) throw ShapeError("reconstruction_loss: target shape");
  if (n == 0) {
    if (grad_z) *grad_z = Matrix(0, z.cols());
    return 0.0;
  }
  const double w = positive_weight(n, target.nnz());
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  Matrix logits = matmul_nt(z, z);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    auto row = logits.row(j);
    auto idx = target.row_indices(j);
    std::size_t next = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double s = row[r];
      const bool edge = next < idx.size() && idx[next] == r;
      if (edge) ++next;
      // softplus and sigmoid share exp(-|s|)
      const double e = std::exp(-std::abs(s));
      const double tail = std::log1p(e);
      const double sig = s >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      if (edge) {
        total += w * (std::max(-s, 0.0) + tail);
        if (grad_z) row[r] = -w * (1.0 - sig) * scale;
      } else {
        total += std::max(s, 0.0) + tail;
        if (grad_z) row[r] = sig * scale;
      }
    }
  }
  if (grad_z) {
    // logits now hold dL/dS; dL/dZ = (dS + dS^T) Z
    *grad_z = matmul(logits, z);
    *grad_z += matmul_tn(logits, z);
  }
  return total * scale;
}

}  // namespace fimgnn
