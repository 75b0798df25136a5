#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fimgnn/matrix.hpp"

namespace fimgnn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. One moment pair per registered parameter.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamOptions options, std::span<const Matrix* const> params);

  /// Applies one update in place. params and grads must match the registered shapes.
  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t step_count() const noexcept { return step_; }
  std::size_t num_params() const noexcept { return first_.size(); }

  Matrix& first_moment(std::size_t i) { return first_.at(i); }
  Matrix& second_moment(std::size_t i) { return second_.at(i); }
  const Matrix& first_moment(std::size_t i) const { return first_.at(i); }
  const Matrix& second_moment(std::size_t i) const { return second_.at(i); }

  /// Restores a saved state; moment shapes are validated on the next step.
  void restore(std::uint64_t step, std::vector<Matrix> first, std::vector<Matrix> second);

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

}  // namespace fimgnn
