#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fimgnn/metrics.hpp"

namespace fimgnn {

inline constexpr int kReportSchemaVersion = 1;

struct ClientRoundReport {
  std::size_t view_id = 0;
  std::string encoder;
  double missing_rate = 0.0;
  double reconstruction_loss = 0.0;
  std::optional<double> clustering_loss;
  double weight = 1.0;
};

struct RoundReport {
  std::size_t round = 0;
  std::vector<ClientRoundReport> clients;
  double server_inertia = 0.0;
  std::optional<ClusterScores> scores;
};

struct MetricsReport {
  std::string dataset;
  std::size_t num_samples = 0;
  std::size_t num_views = 0;
  std::size_t num_clusters = 0;
  std::size_t overlap_size = 0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
  /// Free-form description of how the data was prepared (manifest, rates, mask seed).
  nlohmann::ordered_json experiment = nlohmann::ordered_json::object();
  std::vector<RoundReport> rounds;
  std::optional<ClusterScores> final_scores;
};

nlohmann::ordered_json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::ordered_json& j);

/// Checks the structural contract of report.json (required keys, types, contiguous rounds).
/// Returns an empty string when valid, otherwise the first problem found.
std::string validate_report_json(const nlohmann::json& j);

}  // namespace fimgnn
