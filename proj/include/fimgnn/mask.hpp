#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fimgnn {

// Which global samples each view retains. present(v, j) == true means row j of view v exists.
class PresenceMask {
 public:
  PresenceMask() = default;
  PresenceMask(std::size_t num_views, std::size_t num_samples, bool fill = true);

  std::size_t num_views() const noexcept { return bits_.size(); }
  std::size_t num_samples() const noexcept { return num_samples_; }

  bool present(std::size_t view, std::size_t sample) const { return bits_.at(view).at(sample) != 0; }
  void set(std::size_t view, std::size_t sample, bool value) { bits_.at(view).at(sample) = value ? 1 : 0; }

  std::size_t retained(std::size_t view) const;
  std::size_t missing(std::size_t view) const { return num_samples_ - retained(view); }
  /// Fraction of the N samples absent from this view.
  double missing_rate(std::size_t view) const;
  std::size_t views_present(std::size_t sample) const;

  /// Every sample is retained by at least one view.
  bool covers_every_sample() const;

  /// Sorted global IDs retained by the view.
  std::vector<std::size_t> ids(std::size_t view) const;
  /// Sorted global IDs retained by every view.
  std::vector<std::size_t> overlap_ids() const;

  bool operator==(const PresenceMask&) const = default;

 private:
  std::size_t num_samples_ = 0;
  std::vector<std::vector<std::uint8_t>> bits_;
};

/// Drops exactly round(rate_i * N) samples per view, then repairs samples left with no
/// view. Throws std::invalid_argument for rates outside [0,1) or when more than (m-1)*N rows
/// would be dropped in total.
PresenceMask generate_mask(std::size_t num_samples, std::span<const double> rates,
                           std::uint64_t seed);

/// CSV: one line per sample, one 0/1 column per view.
PresenceMask load_mask_csv(const std::filesystem::path& path);
void save_mask_csv(const std::filesystem::path& path, const PresenceMask& mask);

}  // namespace fimgnn
