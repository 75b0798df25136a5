#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "fimgnn/adam.hpp"
#include "fimgnn/assignment.hpp"
#include "fimgnn/gnn.hpp"
#include "fimgnn/kmeans.hpp"
#include "fimgnn/matrix.hpp"
#include "fimgnn/view_dataset.hpp"

namespace fimgnn {

/// GCN when the view's missing rate is at most beta, GAT otherwise.
EncoderKind select_encoder(double missing_rate, double beta) noexcept;

using Encoder = std::variant<GcnEncoder, GatEncoder>;

EncoderKind kind_of(const Encoder& enc) noexcept;
std::vector<Matrix*> encoder_parameters(Encoder& enc);
std::vector<const Matrix*> encoder_parameters(const Encoder& enc);
Matrix encode(const Encoder& enc, const GraphBatch& graph);

struct LossBreakdown {
  double reconstruction = 0.0;
  double clustering = 0.0;
  double total = 0.0;
};

struct LossGradients {
  /// Same order as encoder_parameters().
  std::vector<Matrix> encoder;
  Matrix centers;
};

/// L = L_r + gamma * L_c on one graph. The reconstruction target is A + I.
/// `pseudo_labels` may be null, in which case only L_r is evaluated and grads.centers is zero.
LossBreakdown total_loss(const Encoder& enc, const GraphBatch& graph, const Matrix& centers,
                         const Matrix* pseudo_labels, double gamma, LossGradients* grads = nullptr);

struct ClientOptions {
  EncoderKind kind = EncoderKind::Gcn;
  std::size_t hidden_dim = 128;
  std::size_t embed_dim = 16;
  OutputActivation gcn_output = OutputActivation::Linear;
  std::size_t num_clusters = 2;
  std::uint64_t seed = 0;
  double pretrain_lr = 0.005;
  double train_lr = 0.001;
  KMeansOptions kmeans;
};

struct LocalRoundResult {
  /// Embeddings of the overlap rows, canonical overlap order.
  Matrix overlap_embeddings;
  Matrix centers;
  LossBreakdown last_loss;
};

// One federated participant. Owns its view's data, encoder, cluster centers and optimizer.
class Client {
 public:
  Client(ViewDataset data, const ClientOptions& options);

  std::size_t view_id() const noexcept { return data_.view_id; }
  EncoderKind kind() const noexcept { return kind_of(encoder_); }
  double missing_rate() const noexcept { return data_.missing_rate; }
  const ViewDataset& data() const noexcept { return data_; }
  const ClientOptions& options() const noexcept { return options_; }
  std::size_t overlap_size() const noexcept { return data_.overlap_rows.size(); }

  /// Reconstruction-only Adam on all local rows, then k-means init of the centers.
  /// Returns the reconstruction loss before each epoch plus the final one.
  std::vector<double> pretrain(std::size_t epochs);

  /// Permutes center rows (and their optimizer moments) so the client's hard assignments on the
  /// overlap rows best agree with argmax(P). Returns the applied row permutation.
  std::vector<std::size_t> align_to(const Matrix& pseudo_labels);

  /// T Adam epochs on the overlap-induced subgraph minimizing L_r + gamma * KL(P || Q).
  LocalRoundResult local_train_round(const Matrix& pseudo_labels, double gamma, std::size_t epochs);

  Matrix overlap_embeddings() const;
  Matrix full_embeddings() const;
  /// Q over every local row, computed on the full local graph.
  Matrix full_soft_assignments() const;
  /// Q restricted to the overlap rows, taken from full_soft_assignments().
  Matrix overlap_rows_of(const Matrix& full) const;

  const Encoder& encoder() const noexcept { return encoder_; }
  Encoder& encoder() noexcept { return encoder_; }
  const Matrix& centers() const noexcept { return centers_; }
  const GraphBatch& full_graph() const noexcept { return full_; }
  const GraphBatch& overlap_graph() const noexcept { return overlap_; }

  bool has_train_optimizer() const noexcept { return train_adam_ready_; }
  const AdamState& train_optimizer() const noexcept { return train_adam_; }

  /// Replaces trainable state, e.g. from a checkpoint.
  void restore(Encoder encoder, Matrix centers, std::optional<AdamState> train_adam);

 private:
  void ensure_train_optimizer();

  ViewDataset data_;
  ClientOptions options_;
  GraphBatch full_;
  GraphBatch overlap_;
  Encoder encoder_;
  Matrix centers_;
  AdamState train_adam_;
  bool train_adam_ready_ = false;
};

}  // namespace fimgnn
