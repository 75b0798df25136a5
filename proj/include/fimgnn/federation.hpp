#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fimgnn/client.hpp"
#include "fimgnn/config.hpp"
#include "fimgnn/mask.hpp"
#include "fimgnn/protocol.hpp"
#include "fimgnn/report.hpp"
#include "fimgnn/server.hpp"
#include "fimgnn/view_dataset.hpp"

namespace fimgnn {

struct RunData {
  std::string name = "dataset";
  std::size_t num_samples = 0;
  std::size_t num_clusters = 0;
  std::vector<ViewDataset> views;
  std::optional<std::vector<std::int64_t>> labels;
};

/// Masks the complete views and builds each client's dataset.
RunData prepare_run_data(std::string name, std::span<const Matrix> complete_views,
                         const PresenceMask& mask, std::size_t num_clusters,
                         std::optional<std::vector<std::int64_t>> labels, std::size_t knn_k);

/// Averages each sample's (label-aligned) q rows over the views where it is present, then argmax.
/// `global_ids[i]` maps rows of `assignments[i]` to samples.
std::vector<std::int64_t> final_predict(std::span<const Matrix> assignments,
                                        std::span<const std::vector<std::size_t>> global_ids,
                                        std::size_t num_samples);

// Observation points for tests and tooling. All callbacks run on the coordinating thread.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_client_update(const ClientUpdate&) {}
  virtual void on_broadcast(const ServerBroadcast&, const GlobalState&) {}
  /// Full-graph Q of one client, already permuted into the global label space.
  virtual void on_client_assignments(std::size_t /*round*/, std::size_t /*view*/, const Matrix&) {}
  virtual void on_predictions(std::size_t /*round*/, const std::vector<std::int64_t>&) {}
};

struct RunHooks {
  std::function<void(std::size_t round, KMeansResult&)> on_kmeans;
  std::function<void(std::size_t round, Matrix& sharpened)> on_sharpened;
  RunObserver* observer = nullptr;
};

struct RunResult {
  MetricsReport report;
  std::vector<std::int64_t> predictions;
  /// JSON-lines protocol trace, one record per message.
  std::vector<nlohmann::ordered_json> trace;
  /// Aggregated overlap features per executed round.
  std::vector<std::pair<std::size_t, Matrix>> global_embeddings;
  double pretrain_seconds = 0.0;
  /// Wall clock per executed round (round 1 includes pretraining).
  std::vector<std::pair<std::size_t, double>> round_seconds;
};

// Drives pretraining and the communication rounds over in-process clients.
class Federation {
 public:
  Federation(RunData data, RunConfig config, RunHooks hooks = {});
  ~Federation();
  Federation(Federation&&) noexcept;
  Federation& operator=(Federation&&) noexcept;

  /// Runs the remaining rounds up to config.e_rounds. When `checkpoint_dir` is set, the full
  /// state is written there after every round.
  RunResult run(const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

  std::size_t completed_rounds() const noexcept;
  const std::vector<Client>& clients() const noexcept;
  const Server& server() const noexcept;
  const RunConfig& config() const noexcept;

  void save_checkpoint(const std::filesystem::path& dir) const;
  /// Rebuilds a federation from `save_checkpoint` output. `data` must be the same prepared data.
  static Federation resume(const std::filesystem::path& dir, RunData data, RunHooks hooks = {},
                           std::size_t threads = 1);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace fimgnn
