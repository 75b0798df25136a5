#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fimgnn {

enum class NmiNormalization { Geometric, Arithmetic };

/// Best one-to-one cluster-to-class matching accuracy.
double clustering_accuracy(std::span<const std::int64_t> truth, std::span<const std::int64_t> pred);

/// I(Y;C) normalised by sqrt(H(Y) H(C)) (or their mean). Natural log.
double normalized_mutual_information(std::span<const std::int64_t> truth,
                                     std::span<const std::int64_t> pred,
                                     NmiNormalization norm = NmiNormalization::Geometric);

/// Pair-counting adjusted Rand index. Degenerate inputs (0/0) score 1.
double adjusted_rand_index(std::span<const std::int64_t> truth, std::span<const std::int64_t> pred);

struct ClusterScores {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
};

ClusterScores evaluate_clustering(std::span<const std::int64_t> truth,
                                  std::span<const std::int64_t> pred,
                                  NmiNormalization norm = NmiNormalization::Geometric);

}  // namespace fimgnn
