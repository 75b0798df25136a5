#include "fimgnn/server.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fimgnn/assignment.hpp"
#include "fimgnn/errors.hpp"
#include "fimgnn/hungarian.hpp"
#include "fimgnn/random.hpp"

namespace fimgnn {

std::uint64_t overlap_digest(std::span<const std::size_t> global_ids) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t id : global_ids) {
    for (int b = 0; b < 8; ++b) {
      h ^= (static_cast<std::uint64_t>(id) >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double center_variance(const Matrix& centers) {
  const std::size_t k = centers.rows(), d = centers.cols();
  if (k == 0 || d == 0) return 0.0;
  double total = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < k; ++r) mean += centers(r, c);
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (std::size_t r = 0; r < k; ++r) var += (centers(r, c) - mean) * (centers(r, c) - mean);
    total += var / static_cast<double>(k);
  }
  return total / static_cast<double>(d);
}

double view_weight(double sigma, std::span<const double> all_sigmas) {
  double total = 0.0;
  for (double s : all_sigmas) total += s;
  if (!(total > 0.0)) return 1.0;
  return 1.0 + std::log(1.0 + sigma / total);
}

std::vector<double> view_weights(std::span<const Matrix> centers) {
  std::vector<double> sigmas;
  sigmas.reserve(centers.size());
  for (const auto& u : centers) sigmas.push_back(center_variance(u));
  std::vector<double> weights;
  weights.reserve(sigmas.size());
  for (double s : sigmas) weights.push_back(view_weight(s, sigmas));
  return weights;
}

double embedding_scale(const Matrix& z) {
  const double v = center_variance(z);
  return v > 0.0 ? std::sqrt(v) : 1.0;
}

Matrix aggregate(std::span<const Matrix> overlap_embeddings, std::span<const double> weights) {
  if (overlap_embeddings.size() != weights.size()) throw ShapeError("aggregate: one weight per view");
  if (overlap_embeddings.empty()) return {};
  const std::size_t rows = overlap_embeddings.front().rows();
  std::vector<Matrix> scaled;
  scaled.reserve(overlap_embeddings.size());
  for (std::size_t i = 0; i < overlap_embeddings.size(); ++i) {
    if (overlap_embeddings[i].rows() != rows) {
      throw ProtocolError("aggregate: view " + std::to_string(i) + " sent " +
                          std::to_string(overlap_embeddings[i].rows()) + " overlap rows, expected " +
                          std::to_string(rows));
    }
    scaled.push_back(overlap_embeddings[i] * weights[i]);
  }
  return hconcat(scaled);
}

void canonicalize_clusters(KMeansResult& result) {
  const std::size_t k = result.centers.rows();
  std::vector<std::size_t> first_member(k, result.labels.size());
  for (std::size_t j = 0; j < result.labels.size(); ++j) {
    auto& f = first_member[result.labels[j]];
    f = std::min(f, j);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return first_member[a] < first_member[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t i = 0; i < k; ++i) rank[order[i]] = i;
  result.centers = permute_rows(result.centers, order);
  for (auto& l : result.labels) l = rank[l];
}

GlobalClustering global_cluster(const Matrix& z, std::size_t k, std::uint64_t seed,
                                const KMeansOptions& options, const KMeansHook& hook) {
  if (z.rows() < k) {
    throw ProtocolError("global clustering needs at least " + std::to_string(k) +
                        " overlap samples, got " + std::to_string(z.rows()));
  }
  KMeansResult km = kmeans(z, k, seed, options);
  if (hook) hook(km);
  canonicalize_clusters(km);
  GlobalClustering out;
  out.soft = soft_assign(z, km.centers);
  out.centers = std::move(km.centers);
  out.labels = std::move(km.labels);
  out.inertia = km.inertia;
  return out;
}

Matrix sharpen(const Matrix& soft) {
  const std::size_t n = soft.rows(), k = soft.cols();
  std::vector<double> freq(k, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < k; ++c) freq[c] += soft(j, c);
  Matrix out(n, k);
  for (std::size_t j = 0; j < n; ++j) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double v = freq[c] > 0.0 ? soft(j, c) * soft(j, c) / freq[c] : 0.0;
      out(j, c) = v;
      total += v;
    }
    if (total > 0.0)
      for (std::size_t c = 0; c < k; ++c) out(j, c) /= total;
  }
  return out;
}

std::vector<std::size_t> matching_permutation(std::span<const std::size_t> current,
                                              std::span<const std::size_t> reference,
                                              std::size_t k) {
  if (current.size() != reference.size()) {
    throw ProtocolError("label alignment: " + std::to_string(current.size()) + " rows vs " +
                        std::to_string(reference.size()));
  }
  // cost(now, ref) = -(count * (k+1) + [now == ref]): agreement first, fixed points second.
  Matrix cost(k, k);
  const double scale = static_cast<double>(k + 1);
  for (std::size_t j = 0; j < current.size(); ++j) cost(current[j], reference[j]) -= scale;
  for (std::size_t c = 0; c < k; ++c) cost(c, c) -= 1.0;
  const auto assignment = hungarian(cost);  // current cluster -> reference cluster
  std::vector<std::size_t> perm(k);
  for (std::size_t now = 0; now < k; ++now) perm[assignment[now]] = now;
  return perm;
}

Alignment LabelAligner::align(const Matrix& sharpened) {
  const std::size_t k = sharpened.cols();
  Alignment out;
  if (!previous_) {
    out.permutation.resize(k);
    std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
    out.pseudo_labels = sharpened;
  } else {
    out.permutation = matching_permutation(argmax_rows(sharpened), *previous_, k);
    out.pseudo_labels = permute_columns(sharpened, out.permutation);
  }
  previous_ = argmax_rows(out.pseudo_labels);
  return out;
}

Server::Server(std::size_t num_clusters, std::uint64_t seed, KMeansOptions kmeans,
               bool standardize_views)
    : num_clusters_(num_clusters), seed_(seed), kmeans_(kmeans), standardize_views_(standardize_views) {}

ServerBroadcast Server::step(std::size_t round, std::vector<ClientUpdate> updates,
                             const ServerHooks& hooks) {
  if (updates.empty()) throw ProtocolError("round " + std::to_string(round) + ": no client updates");
  std::sort(updates.begin(), updates.end(),
            [](const ClientUpdate& a, const ClientUpdate& b) { return a.view_id < b.view_id; });
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const auto& u = updates[i];
    if (u.round != round) {
      throw ProtocolError("view " + std::to_string(u.view_id) + " sent an update for round " +
                          std::to_string(u.round) + " during round " + std::to_string(round));
    }
    if (i > 0 && u.view_id == updates[i - 1].view_id) {
      throw ProtocolError("duplicate update from view " + std::to_string(u.view_id));
    }
    if (u.overlap_digest != updates.front().overlap_digest) {
      throw ProtocolError("view " + std::to_string(u.view_id) + " disagrees on the overlap set");
    }
    if (u.overlap_embeddings.rows() != updates.front().overlap_embeddings.rows()) {
      throw ProtocolError("view " + std::to_string(u.view_id) + " sent " +
                          std::to_string(u.overlap_embeddings.rows()) + " overlap rows, expected " +
                          std::to_string(updates.front().overlap_embeddings.rows()));
    }
    if (u.centers.rows() != num_clusters_) {
      throw ProtocolError("view " + std::to_string(u.view_id) + " sent " +
                          std::to_string(u.centers.rows()) + " centers, expected " +
                          std::to_string(num_clusters_));
    }
  }

  std::vector<Matrix> embeddings, centers;
  for (auto& u : updates) {
    embeddings.push_back(std::move(u.overlap_embeddings));
    centers.push_back(std::move(u.centers));
  }
  if (standardize_views_) {
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      const double inv = 1.0 / embedding_scale(embeddings[i]);
      embeddings[i] *= inv;
      centers[i] *= inv;
    }
  }

  GlobalState next;
  next.round = round;
  next.weights = view_weights(centers);
  next.z = aggregate(embeddings, next.weights);
  GlobalClustering clustering =
      global_cluster(next.z, num_clusters_, derive_seed(seed_, round, 3), kmeans_, hooks.on_kmeans);
  next.centers = std::move(clustering.centers);
  next.soft = std::move(clustering.soft);
  next.inertia = clustering.inertia;

  Matrix sharpened = sharpen(next.soft);
  if (hooks.on_sharpened) hooks.on_sharpened(sharpened);
  Alignment aligned = aligner_.align(sharpened);
  next.pseudo_labels = std::move(aligned.pseudo_labels);
  next.permutation = std::move(aligned.permutation);
  state_ = std::move(next);

  return ServerBroadcast{round, state_.pseudo_labels, state_.permutation};
}

void Server::restore(GlobalState state, LabelAligner aligner) {
  state_ = std::move(state);
  aligner_ = std::move(aligner);
}

}  // namespace fimgnn
