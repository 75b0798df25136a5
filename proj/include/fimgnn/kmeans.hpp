#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fimgnn/matrix.hpp"

namespace fimgnn {

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  /// Relative inertia improvement below which Lloyd iterations stop.
  double tol = 1e-6;
};

struct KMeansResult {
  Matrix centers;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
  /// Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_trace;
};

/// k-means++ seeded Lloyd iterations, best of `restarts`. Deterministic in `seed`.
/// Throws std::invalid_argument when k == 0 or k > n.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Sum of squared distances from each point to its assigned center.
double kmeans_inertia(const Matrix& points, const Matrix& centers,
                      const std::vector<std::size_t>& labels);

}  // namespace fimgnn
