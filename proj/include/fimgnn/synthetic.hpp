#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fimgnn/matrix.hpp"

namespace fimgnn {

struct SyntheticData {
  std::vector<Matrix> views;
  std::vector<std::int64_t> labels;
};

/// Gaussian blobs (unit per-dimension std) sharing one cluster assignment across views.
/// Within each view the K centers sit pairwise `separation` apart. Deterministic in `seed`.
SyntheticData generate_synthetic(std::size_t num_samples, std::size_t num_clusters,
                                 std::span<const std::size_t> dims, double separation,
                                 std::uint64_t seed);

}  // namespace fimgnn
