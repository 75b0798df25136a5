#include "fimgnn/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "fimgnn/random.hpp"

namespace fimgnn {

namespace {

std::size_t nearest_center(std::span<const double> point, const Matrix& centers, double& best_d) {
  std::size_t best = 0;
  best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(point, centers.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Matrix seed_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::size_t first = std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)));
  std::copy_n(points.row(first).data(), points.cols(), centers.row(0).data());

  std::vector<double> mindist(n);
  for (std::size_t i = 0; i < n; ++i) mindist[i] = squared_distance(points.row(i), centers.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : mindist) total += d;
    std::size_t chosen = n - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += mindist[i];
        if (acc > target && mindist[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      // Every point coincides with a chosen center.
      chosen = std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)));
    }
    std::copy_n(points.row(chosen).data(), points.cols(), centers.row(c).data());
    for (std::size_t i = 0; i < n; ++i) {
      mindist[i] = std::min(mindist[i], squared_distance(points.row(i), centers.row(c)));
    }
  }
  return centers;
}

double assign(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& labels,
              std::vector<double>& dists) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    labels[i] = nearest_center(points.row(i), centers, dists[i]);
    inertia += dists[i];
  }
  return inertia;
}

void update_centers(const Matrix& points, Matrix& centers, std::vector<std::size_t>& labels) {
  const std::size_t k = centers.rows();
  const std::size_t d = points.cols();
  std::vector<std::size_t> counts(k, 0);
  Matrix sums(k, d);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    ++counts[labels[i]];
    auto dst = sums.row(labels[i]);
    auto src = points.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
  }

  // Empty cluster repair: hand it the point farthest from its current center.
  std::vector<double> cost(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
    cost[i] = squared_distance(points.row(i), centers.row(labels[i]));
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = 0;
    for (std::size_t i = 1; i < points.rows(); ++i)
      if (cost[i] > cost[far] && counts[labels[i]] > 1) far = i;
    if (counts[labels[far]] <= 1) continue;
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
    cost[far] = 0.0;
    std::copy_n(points.row(far).data(), d, centers.row(c).data());
  }
}

}  // namespace

double kmeans_inertia(const Matrix& points, const Matrix& centers,
                      const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    total += squared_distance(points.row(i), centers.row(labels.at(i)));
  return total;
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const std::size_t n = points.rows();
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > n) {
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds n=" +
                                std::to_string(n));
  }

  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);

  for (std::size_t attempt = 0; attempt < restarts; ++attempt) {
    Matrix centers = seed_plus_plus(points, k, rng);
    std::vector<std::size_t> labels(n, 0);
    std::vector<double> dists(n, 0.0);
    std::vector<double> trace;

    double inertia = assign(points, centers, labels, dists);
    trace.push_back(inertia);
    for (std::size_t it = 0; it < options.max_iter; ++it) {
      update_centers(points, centers, labels);
      const double next = assign(points, centers, labels, dists);
      trace.push_back(next);
      const bool converged = inertia - next <= options.tol * inertia;
      inertia = next;
      if (converged) break;
    }

    if (inertia < best.inertia) {
      best.centers = std::move(centers);
      best.labels = std::move(labels);
      best.inertia = inertia;
      best.inertia_trace = std::move(trace);
    }
  }
  return best;
}

}  // namespace fimgnn
