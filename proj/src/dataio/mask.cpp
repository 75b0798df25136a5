#include "fimgnn/mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fimgnn/errors.hpp"
#include "fimgnn/random.hpp"

namespace fimgnn {

PresenceMask::PresenceMask(std::size_t num_views, std::size_t num_samples, bool fill)
    : num_samples_(num_samples),
      bits_(num_views, std::vector<std::uint8_t>(num_samples, fill ? 1 : 0)) {}

std::size_t PresenceMask::retained(std::size_t view) const {
  const auto& b = bits_.at(view);
  return static_cast<std::size_t>(std::count(b.begin(), b.end(), std::uint8_t{1}));
}

double PresenceMask::missing_rate(std::size_t view) const {
  if (num_samples_ == 0) return 0.0;
  return static_cast<double>(missing(view)) / static_cast<double>(num_samples_);
}

std::size_t PresenceMask::views_present(std::size_t sample) const {
  std::size_t count = 0;
  for (const auto& b : bits_) count += b.at(sample);
  return count;
}

bool PresenceMask::covers_every_sample() const {
  for (std::size_t j = 0; j < num_samples_; ++j)
    if (views_present(j) == 0) return false;
  return true;
}

std::vector<std::size_t> PresenceMask::ids(std::size_t view) const {
  std::vector<std::size_t> out;
  const auto& b = bits_.at(view);
  for (std::size_t j = 0; j < num_samples_; ++j)
    if (b[j]) out.push_back(j);
  return out;
}

std::vector<std::size_t> PresenceMask::overlap_ids() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < num_samples_; ++j)
    if (views_present(j) == num_views()) out.push_back(j);
  return out;
}

PresenceMask generate_mask(std::size_t num_samples, std::span<const double> rates,
                           std::uint64_t seed) {
  const std::size_t m = rates.size();
  if (m == 0) throw std::invalid_argument("generate_mask: need at least one view");
  std::size_t total_drop = 0;
  for (double r : rates) {
    if (!(r >= 0.0 && r < 1.0)) {
      throw std::invalid_argument("generate_mask: rate " + std::to_string(r) +
                                  " outside [0,1)");
    }
    total_drop += static_cast<std::size_t>(std::lround(r * static_cast<double>(num_samples)));
  }
  if (total_drop > (m - 1) * num_samples) {
    throw std::invalid_argument("generate_mask: rates drop more rows than coverage of every sample allows");
  }

  Rng rng(seed);
  PresenceMask mask(m, num_samples, true);
  std::vector<std::size_t> order(num_samples);
  for (std::size_t v = 0; v < m; ++v) {
    const auto drop = static_cast<std::size_t>(std::lround(rates[v] * static_cast<double>(num_samples)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < drop; ++i) mask.set(v, order[i], false);
  }

  // Repair samples with no view; compensate so each view keeps its drop count.
  for (std::size_t j = 0; j < num_samples; ++j) {
    if (mask.views_present(j) != 0) continue;
    std::uniform_int_distribution<std::size_t> pick_view(0, m - 1);
    const std::size_t v = pick_view(rng);
    mask.set(v, j, true);
    if (m < 2) continue;
    // Any other sample this view holds that some other view also covers can give up its row.
    std::vector<std::size_t> spare;
    for (std::size_t r = 0; r < num_samples; ++r)
      if (r != j && mask.present(v, r) && mask.views_present(r) >= 2) spare.push_back(r);
    if (spare.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, spare.size() - 1);
    mask.set(v, spare[pick(rng)], false);
  }
  return mask;
}

PresenceMask load_mask_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::uint8_t> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      if (first == std::string::npos) throw FormatError("empty mask entry", line_offset);
      const std::string v = field.substr(first, last - first + 1);
      if (v != "0" && v != "1") throw FormatError("mask entries must be 0 or 1", line_offset);
      row.push_back(v == "1" ? 1 : 0);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("mask row width differs from the first row", line_offset);
    }
    rows.push_back(std::move(row));
  }
  const std::size_t m = rows.empty() ? 0 : rows.front().size();
  PresenceMask mask(m, rows.size(), false);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t v = 0; v < m; ++v) mask.set(v, j, rows[j][v] != 0);
  return mask;
}

void save_mask_csv(const std::filesystem::path& path, const PresenceMask& mask) {
  std::ostringstream out;
  for (std::size_t j = 0; j < mask.num_samples(); ++j) {
    for (std::size_t v = 0; v < mask.num_views(); ++v) out << (v ? "," : "") << (mask.present(v, j) ? 1 : 0);
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << out.str();
}

}  // namespace fimgnn
