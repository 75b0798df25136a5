#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fimgnn/gnn.hpp"
#include "fimgnn/matrix.hpp"

namespace fimgnn {

/// FNV-1a over the canonical overlap IDs. Every client must report the same digest.
std::uint64_t overlap_digest(std::span<const std::size_t> global_ids) noexcept;

// Client -> server, once per client per communication round.
struct ClientUpdate {
  std::size_t round = 0;
  std::size_t view_id = 0;
  std::uint64_t overlap_digest = 0;
  Matrix overlap_embeddings;  // Z_C^i
  Matrix centers;             // U^i
  EncoderKind encoder = EncoderKind::Gcn;
  double missing_rate = 0.0;
  double reconstruction_loss = 0.0;
  /// Absent in the pretraining round.
  bool has_clustering_loss = false;
  double clustering_loss = 0.0;
};

// Server -> every client, once per communication round.
struct ServerBroadcast {
  std::size_t round = 0;
  Matrix pseudo_labels;                  // P
  std::vector<std::size_t> permutation;  // P(:, j) = sharpened(:, permutation[j])
};

}  // namespace fimgnn
