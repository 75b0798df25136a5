#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fimgnn/kmeans.hpp"
#include "fimgnn/matrix.hpp"
#include "fimgnn/protocol.hpp"

namespace fimgnn {

/// Mean over dimensions of the per-dimension variance across the rows of `centers`.
double center_variance(const Matrix& centers);

/// 1 + ln(1 + sigma / sum(all_sigmas)); 1 when every sigma is zero.
double view_weight(double sigma, std::span<const double> all_sigmas);

/// View weights from each client's centers, in the given order.
std::vector<double> view_weights(std::span<const Matrix> centers);

/// Root of center_variance(z): the typical per-dimension spread of one view's embeddings.
/// Returns 1 for constant input so scaling by its inverse is always defined.
double embedding_scale(const Matrix& z);

/// [w_1 Z_C^1, ..., w_m Z_C^m]
Matrix aggregate(std::span<const Matrix> overlap_embeddings, std::span<const double> weights);

struct GlobalClustering {
  Matrix centers;                    // C
  Matrix soft;                       // S
  std::vector<std::size_t> labels;   // k-means labels after reordering
  double inertia = 0.0;
};

/// Called on the raw k-means result before cluster reordering; lets tests relabel clusters.
using KMeansHook = std::function<void(KMeansResult&)>;

/// Reorders clusters by the lowest sample index they contain (empty clusters last).
void canonicalize_clusters(KMeansResult& result);

/// k-means on Z, canonical cluster order, then Student-t soft assignments against C.
GlobalClustering global_cluster(const Matrix& z, std::size_t k, std::uint64_t seed,
                                const KMeansOptions& options = {},
                                const KMeansHook& hook = nullptr);

/// Frequency-penalised squared target: t_jk ∝ s_jk^2 / f_k with f_k = sum_j s_jk, rows normalised.
Matrix sharpen(const Matrix& soft);

struct Alignment {
  Matrix pseudo_labels;
  std::vector<std::size_t> permutation;  // out(:, j) = in(:, permutation[j])
};

/// Column permutation that best agrees (Hungarian on contingency counts) between the hard labels
/// of `current` and `reference`. Among maximal agreements the one with the most fixed points wins.
std::vector<std::size_t> matching_permutation(std::span<const std::size_t> current,
                                              std::span<const std::size_t> reference,
                                              std::size_t k);

// Keeps cluster indices stable across communication rounds.
class LabelAligner {
 public:
  /// First call returns the identity. Afterwards permutes columns to match the previous hard labels.
  Alignment align(const Matrix& sharpened);

  const std::optional<std::vector<std::size_t>>& previous() const noexcept { return previous_; }
  void restore(std::optional<std::vector<std::size_t>> previous) { previous_ = std::move(previous); }

 private:
  std::optional<std::vector<std::size_t>> previous_;
};

struct GlobalState {
  std::size_t round = 0;
  std::vector<double> weights;
  Matrix z;
  Matrix centers;
  Matrix soft;
  Matrix pseudo_labels;
  std::vector<std::size_t> permutation;
  double inertia = 0.0;
};

struct ServerHooks {
  KMeansHook on_kmeans;
  /// Sees the sharpened targets before alignment.
  std::function<void(Matrix&)> on_sharpened;
};

class Server {
 public:
  /// With `standardize_views`, each view's embeddings and centers are divided by
  /// embedding_scale(Z_C^i) before weighting, so no view dominates by raw magnitude alone.
  Server(std::size_t num_clusters, std::uint64_t seed, KMeansOptions kmeans = {},
         bool standardize_views = false);

  /// Reduces one round of updates (ascending view id, regardless of arrival order).
  ServerBroadcast step(std::size_t round, std::vector<ClientUpdate> updates,
                       const ServerHooks& hooks = {});

  const GlobalState& state() const noexcept { return state_; }
  const LabelAligner& aligner() const noexcept { return aligner_; }
  void restore(GlobalState state, LabelAligner aligner);

 private:
  std::size_t num_clusters_;
  std::uint64_t seed_;
  KMeansOptions kmeans_;
  bool standardize_views_;
  GlobalState state_;
  LabelAligner aligner_;
};

}  // namespace fimgnn
