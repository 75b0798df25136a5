#include "fimgnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fimgnn/random.hpp"

namespace fimgnn {

namespace {

// K centers in R^dim with every pairwise distance at least `separation`.
Matrix place_centers(std::size_t k, std::size_t dim, double separation, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix centers(k, dim);
  for (double& v : std::span(centers.data(), centers.size())) v = gauss(rng);

  if (dim >= k) {
    // Orthonormal directions scaled so every pair sits exactly `separation` apart.
    for (std::size_t c = 0; c < k; ++c) {
      auto row = centers.row(c);
      for (std::size_t p = 0; p < c; ++p) {
        auto prev = centers.row(p);
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dot += row[j] * prev[j];
        for (std::size_t j = 0; j < dim; ++j) row[j] -= dot * prev[j];
      }
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      for (double& v : row) v /= norm;
    }
    centers *= separation / std::sqrt(2.0);
    return centers;
  }

  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      min_dist = std::min(min_dist, std::sqrt(squared_distance(centers.row(a), centers.row(b))));
  if (min_dist > 0.0 && std::isfinite(min_dist)) centers *= separation / min_dist;
  return centers;
}

}  // namespace

SyntheticData generate_synthetic(std::size_t num_samples, std::size_t num_clusters,
                                 std::span<const std::size_t> dims, double separation,
                                 std::uint64_t seed) {
  if (num_clusters < 2) throw std::invalid_argument("generate_synthetic: need K >= 2");
  if (dims.empty()) throw std::invalid_argument("generate_synthetic: need at least one view");
  for (std::size_t d : dims)
    if (d == 0) throw std::invalid_argument("generate_synthetic: view dimensions must be positive");

  SyntheticData data;
  data.labels.resize(num_samples);
  for (std::size_t j = 0; j < num_samples; ++j) data.labels[j] = static_cast<std::int64_t>(j % num_clusters);
  Rng label_rng(derive_seed(seed, 0));
  std::shuffle(data.labels.begin(), data.labels.end(), label_rng);

  for (std::size_t v = 0; v < dims.size(); ++v) {
    Rng rng(derive_seed(seed, v + 1));
    const Matrix centers = place_centers(num_clusters, dims[v], separation, rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix x(num_samples, dims[v]);
    for (std::size_t j = 0; j < num_samples; ++j) {
      auto center = centers.row(static_cast<std::size_t>(data.labels[j]));
      auto row = x.row(j);
      for (std::size_t c = 0; c < dims[v]; ++c) row[c] = center[c] + gauss(rng);
    }
    data.views.push_back(std::move(x));
  }
  return data;
}

}  // namespace fimgnn
