#pragma once

#include <cstdint>
#include <random>

namespace fimgnn {

using Rng = std::mt19937_64;

/// Deterministic stream derivation: independent seeds for (base, a, b) tuples.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace fimgnn
