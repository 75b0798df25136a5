#include "fimgnn/view_dataset.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fimgnn/errors.hpp"
#include "fimgnn/graph.hpp"
#include "fimgnn/matrix_io.hpp"

namespace fimgnn {

std::vector<ViewDataset> build_view_datasets(std::span<const Matrix> complete_views,
                                             const PresenceMask& mask, std::size_t knn_k) {
  if (complete_views.size() != mask.num_views()) {
    throw ShapeError("mask has " + std::to_string(mask.num_views()) + " views, data has " +
                     std::to_string(complete_views.size()));
  }
  if (!mask.covers_every_sample()) {
    throw std::invalid_argument("mask leaves at least one sample with no view");
  }
  const auto overlap = mask.overlap_ids();

  std::vector<ViewDataset> out;
  out.reserve(complete_views.size());
  for (std::size_t v = 0; v < complete_views.size(); ++v) {
    const Matrix& full = complete_views[v];
    if (full.rows() != mask.num_samples()) {
      throw ShapeError("view " + std::to_string(v) + " has " + std::to_string(full.rows()) +
                       " rows, mask has " + std::to_string(mask.num_samples()));
    }
    ViewDataset ds;
    ds.view_id = v;
    ds.global_ids = mask.ids(v);
    ds.features = select_rows(full, ds.global_ids);
    ds.adjacency = ds.global_ids.size() >= 2 ? knn_graph(ds.features, knn_k)
                                             : CsrMatrix(ds.global_ids.size());
    ds.missing_rate = mask.missing_rate(v);
    for (std::size_t id : overlap) {
      auto it = std::lower_bound(ds.global_ids.begin(), ds.global_ids.end(), id);
      ds.overlap_rows.push_back(static_cast<std::size_t>(it - ds.global_ids.begin()));
    }
    out.push_back(std::move(ds));
  }
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
  LoadedDataset data;
  data.manifest = load_manifest(manifest_path);
  auto views = data.manifest.views;
  std::sort(views.begin(), views.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].id != i) {
      throw std::runtime_error("manifest: view ids must be 0..m-1, found " +
                               std::to_string(views[i].id));
    }
    Matrix x = load_matrix(views[i].path);
    if (x.rows() != data.manifest.n_samples || x.cols() != views[i].dim) {
      throw std::runtime_error("view " + std::to_string(i) + " (" + views[i].path.string() +
                               ") is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                               ", manifest declares " + std::to_string(data.manifest.n_samples) +
                               "x" + std::to_string(views[i].dim));
    }
    data.views.push_back(std::move(x));
  }
  if (data.manifest.labels_path) {
    auto labels = load_labels(*data.manifest.labels_path);
    if (labels.size() != data.manifest.n_samples) {
      throw std::runtime_error("labels file has " + std::to_string(labels.size()) +
                               " entries, manifest declares " +
                               std::to_string(data.manifest.n_samples));
    }
    data.labels = std::move(labels);
  }
  return data;
}

}  // namespace fimgnn
