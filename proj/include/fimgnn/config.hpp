#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fimgnn/gnn.hpp"
#include "fimgnn/kmeans.hpp"
#include "fimgnn/metrics.hpp"

namespace fimgnn {

enum class EncoderPolicy { Auto, ForceGcn, ForceGat };

std::string_view to_string(EncoderPolicy policy) noexcept;
EncoderPolicy parse_encoder_policy(std::string_view text);
OutputActivation parse_output_activation(std::string_view text);

struct LayerDims {
  std::size_t hidden = 128;
  std::size_t embed = 16;
};

struct RunConfig {
  std::size_t e_rounds = 10;
  std::size_t t_epochs = 3;
  double beta = 0.1;
  double gamma = 1.0;
  /// 0 means "take it from the dataset".
  std::size_t num_clusters = 0;
  std::uint64_t seed = 0;
  std::size_t pretrain_epochs = 50;
  double pretrain_lr = 0.005;
  double train_lr = 0.001;
  LayerDims gcn_dims{128, 16};
  LayerDims gat_dims{128, 16};
  EncoderPolicy encoder = EncoderPolicy::Auto;
  OutputActivation gcn_output = OutputActivation::Linear;
  std::size_t knn_k = 10;
  NmiNormalization nmi = NmiNormalization::Geometric;
  /// Rescale each view's overlap embeddings to unit spread before weighting (server side).
  bool standardize_views = false;
  KMeansOptions kmeans;
  /// Execution only; never changes results and is not echoed into reports.
  std::size_t threads = 1;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
  EncoderKind encoder_for(double missing_rate) const noexcept;
};

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace fimgnn
