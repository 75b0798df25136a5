#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fimgnn/client.hpp"
#include "fimgnn/graph.hpp"
#include "fimgnn/matrix.hpp"
#include "fimgnn/random.hpp"

namespace fimgnn::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

// Row-stochastic matrix with strictly positive entries.
inline Matrix random_distribution_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += m(r, c) = dist(rng);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= total;
  }
  return m;
}

inline CsrMatrix random_graph(std::size_t n, double density, Rng& rng) {
  std::bernoulli_distribution edge(density);
  Matrix dense(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) dense(i, j) = dense(j, i) = 1.0;
  return CsrMatrix::from_dense(dense);
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-5});
}

// Largest relative error between `analytic` and central differences of `f` around `param`.
inline double max_fd_error(Matrix& param, const Matrix& analytic, const std::function<double()>& f,
                           double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param.data()[i];
    param.data()[i] = saved + h;
    const double up = f();
    param.data()[i] = saved - h;
    const double down = f();
    param.data()[i] = saved;
    worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

// One random instance of the full local objective for either encoder kind.
struct LossInstance {
  GraphBatch graph;
  Encoder encoder;
  Matrix centers;
  Matrix pseudo_labels;
  double gamma = 1.0;
};

inline LossInstance make_loss_instance(EncoderKind kind, std::uint64_t seed, std::size_t max_n = 12,
                                       std::size_t max_d = 6, std::size_t hidden = 5,
                                       std::size_t embed = 3, std::size_t k = 2,
                                       OutputActivation output = OutputActivation::Linear) {
  Rng rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(k, 3), max_n)(rng);
  const std::size_t d = std::uniform_int_distribution<std::size_t>(2, max_d)(rng);
  LossInstance inst;
  inst.graph = GraphBatch::make(random_matrix(n, d, rng), random_graph(n, 0.35, rng));
  if (kind == EncoderKind::Gcn) {
    inst.encoder = GcnEncoder::glorot(d, hidden, embed, output, rng);
  } else {
    inst.encoder = GatEncoder::glorot(d, hidden, embed, rng);
  }
  inst.centers = random_matrix(k, embed, rng);
  inst.pseudo_labels = random_distribution_rows(n, k, rng);
  inst.gamma = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
  return inst;
}

// Max relative FD error over every encoder parameter and the centers.
inline double total_loss_fd_error(LossInstance& inst) {
  LossGradients grads;
  total_loss(inst.encoder, inst.graph, inst.centers, &inst.pseudo_labels, inst.gamma, &grads);
  auto f = [&] {
    return total_loss(inst.encoder, inst.graph, inst.centers, &inst.pseudo_labels, inst.gamma).total;
  };
  double worst = 0.0;
  auto params = encoder_parameters(inst.encoder);
  for (std::size_t i = 0; i < params.size(); ++i)
    worst = std::max(worst, max_fd_error(*params[i], grads.encoder[i], f));
  worst = std::max(worst, max_fd_error(inst.centers, grads.centers, f));
  return worst;
}

}  // namespace fimgnn::testing
