#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fimgnn/manifest.hpp"
#include "fimgnn/mask.hpp"
#include "fimgnn/matrix.hpp"
#include "fimgnn/sparse.hpp"

namespace fimgnn {

// One client's private slice of the data.
struct ViewDataset {
  std::size_t view_id = 0;
  /// Retained rows only, ordered by global ID.
  Matrix features;
  /// Binary kNN adjacency over the retained rows.
  CsrMatrix adjacency;
  /// Local row -> global sample ID, strictly increasing.
  std::vector<std::size_t> global_ids;
  /// Local rows whose sample is present in every view, in ascending global-ID order.
  std::vector<std::size_t> overlap_rows;
  /// Fraction of all samples missing from this view.
  double missing_rate = 0.0;
};

/// Masks complete views, builds per-view kNN graphs on retained rows only.
std::vector<ViewDataset> build_view_datasets(std::span<const Matrix> complete_views,
                                             const PresenceMask& mask, std::size_t knn_k);

struct LoadedDataset {
  Manifest manifest;
  std::vector<Matrix> views;
  std::optional<std::vector<std::int64_t>> labels;
};

/// Loads every view listed in the manifest, checking row counts and dimensions.
LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace fimgnn
