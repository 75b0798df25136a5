#include "fimgnn/client.hpp"

#include <cmath>
#include <string>

#include "fimgnn/errors.hpp"
#include "fimgnn/server.hpp"
#include "fimgnn/random.hpp"

namespace fimgnn {

namespace {

Encoder make_encoder(std::size_t in_dim, const ClientOptions& o, Rng& rng) {
  if (o.kind == EncoderKind::Gcn) {
    return GcnEncoder::glorot(in_dim, o.hidden_dim, o.embed_dim, o.gcn_output, rng);
  }
  return GatEncoder::glorot(in_dim, o.hidden_dim, o.embed_dim, rng);
}

void check_finite(const LossBreakdown& loss, std::size_t view, const char* phase, std::size_t epoch) {
  if (!std::isfinite(loss.total)) {
    throw NumericalError(std::string(phase) + ": non-finite loss on view " + std::to_string(view) +
                         " at epoch " + std::to_string(epoch) + " (L_r=" +
                         std::to_string(loss.reconstruction) + ", L_c=" +
                         std::to_string(loss.clustering) + ")");
  }
}

}  // namespace

Client::Client(ViewDataset data, const ClientOptions& options)
    : data_(std::move(data)), options_(options) {
  if (options_.num_clusters == 0) throw std::invalid_argument("client: need at least one cluster");
  full_ = GraphBatch::make(data_.features, data_.adjacency);
  overlap_ = GraphBatch::make(select_rows(data_.features, data_.overlap_rows),
                              data_.adjacency.induced(data_.overlap_rows));
  Rng rng(derive_seed(options_.seed, data_.view_id, 1));
  encoder_ = make_encoder(data_.features.cols(), options_, rng);
  centers_ = Matrix(options_.num_clusters, options_.embed_dim);
}

std::vector<double> Client::pretrain(std::size_t epochs) {
  std::vector<Matrix*> params = encoder_parameters(encoder_);
  std::vector<const Matrix*> shapes(params.begin(), params.end());
  AdamState adam({.lr = options_.pretrain_lr}, shapes);
  std::vector<double> trace;
  LossGradients grads;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const LossBreakdown loss = total_loss(encoder_, full_, centers_, nullptr, 0.0, &grads);
    check_finite(loss, view_id(), "pretrain", epoch);
    trace.push_back(loss.total);
    std::vector<const Matrix*> g;
    for (const auto& m : grads.encoder) g.push_back(&m);
    adam.step(params, g);
  }
  const LossBreakdown final_loss = total_loss(encoder_, full_, centers_, nullptr, 0.0);
  check_finite(final_loss, view_id(), "pretrain", epochs);
  trace.push_back(final_loss.total);

  const Matrix z = full_embeddings();
  if (z.rows() < options_.num_clusters) {
    throw ProtocolError("view " + std::to_string(view_id()) + " has " + std::to_string(z.rows()) +
                        " rows, fewer than the " + std::to_string(options_.num_clusters) +
                        " clusters");
  }
  centers_ = kmeans(z, options_.num_clusters, derive_seed(options_.seed, view_id(), 2),
                    options_.kmeans)
                 .centers;
  return trace;
}

std::vector<std::size_t> Client::align_to(const Matrix& pseudo_labels) {
  const std::size_t k = options_.num_clusters;
  if (pseudo_labels.rows() != overlap_size() || pseudo_labels.cols() != k) {
    throw ProtocolError("view " + std::to_string(view_id()) + ": pseudo-labels are " +
                        std::to_string(pseudo_labels.rows()) + "x" +
                        std::to_string(pseudo_labels.cols()) + ", expected " +
                        std::to_string(overlap_size()) + "x" + std::to_string(k));
  }
  const auto mine = argmax_rows(soft_assign(overlap_embeddings(), centers_));
  const auto global = argmax_rows(pseudo_labels);
  const auto rows = matching_permutation(mine, global, k);
  centers_ = permute_rows(centers_, rows);
  if (train_adam_ready_) {
    const std::size_t idx = train_adam_.num_params() - 1;
    train_adam_.first_moment(idx) = permute_rows(train_adam_.first_moment(idx), rows);
    train_adam_.second_moment(idx) = permute_rows(train_adam_.second_moment(idx), rows);
  }
  return rows;
}

void Client::ensure_train_optimizer() {
  if (train_adam_ready_) return;
  std::vector<const Matrix*> shapes;
  for (const Matrix* p : encoder_parameters(std::as_const(encoder_))) shapes.push_back(p);
  shapes.push_back(&centers_);
  train_adam_ = AdamState({.lr = options_.train_lr}, shapes);
  train_adam_ready_ = true;
}

LocalRoundResult Client::local_train_round(const Matrix& pseudo_labels, double gamma,
                                           std::size_t epochs) {
  if (overlap_size() == 0) {
    throw ProtocolError("view " + std::to_string(view_id()) + " has no overlap rows");
  }
  if (pseudo_labels.rows() != overlap_size() || pseudo_labels.cols() != options_.num_clusters) {
    throw ProtocolError("view " + std::to_string(view_id()) +
                        ": pseudo-label shape does not match the overlap set");
  }
  ensure_train_optimizer();
  std::vector<Matrix*> params = encoder_parameters(encoder_);
  params.push_back(&centers_);

  LocalRoundResult result;
  LossGradients grads;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    result.last_loss = total_loss(encoder_, overlap_, centers_, &pseudo_labels, gamma, &grads);
    check_finite(result.last_loss, view_id(), "local round", epoch);
    std::vector<const Matrix*> g;
    for (const auto& m : grads.encoder) g.push_back(&m);
    g.push_back(&grads.centers);
    train_adam_.step(params, g);
  }
  result.overlap_embeddings = overlap_embeddings();
  result.centers = centers_;
  return result;
}

Matrix Client::overlap_embeddings() const { return encode(encoder_, overlap_); }

Matrix Client::full_embeddings() const { return encode(encoder_, full_); }

Matrix Client::full_soft_assignments() const { return soft_assign(full_embeddings(), centers_); }

Matrix Client::overlap_rows_of(const Matrix& full) const {
  return select_rows(full, data_.overlap_rows);
}

void Client::restore(Encoder encoder, Matrix centers, std::optional<AdamState> train_adam) {
  if (kind_of(encoder) != kind()) throw ProtocolError("restore: encoder kind mismatch");
  auto mine = encoder_parameters(std::as_const(encoder_));
  auto theirs = encoder_parameters(std::as_const(encoder));
  for (std::size_t i = 0; i < mine.size(); ++i) require_same_shape(*mine[i], *theirs[i], "restore");
  require_same_shape(centers_, centers, "restore centers");
  encoder_ = std::move(encoder);
  centers_ = std::move(centers);
  train_adam_ready_ = train_adam.has_value();
  if (train_adam) train_adam_ = std::move(*train_adam);
}

}  // namespace fimgnn
