#include "fimgnn/adam.hpp"

#include <cmath>
#include <string>

#include "fimgnn/errors.hpp"

namespace fimgnn {

AdamState::AdamState(AdamOptions options, std::span<const Matrix* const> params)
    : options_(options) {
  if (!(options_.lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
  first_.reserve(params.size());
  second_.reserve(params.size());
  for (const Matrix* p : params) {
    first_.emplace_back(p->rows(), p->cols());
    second_.emplace_back(p->rows(), p->cols());
  }
}

void AdamState::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != first_.size() || grads.size() != first_.size()) {
    throw ShapeError("adam: expected " + std::to_string(first_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], first_[i], "adam param");
    require_same_shape(*grads[i], first_[i], "adam grad");
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    double* m = first_[i].data();
    double* v = second_[i].data();
    for (std::size_t j = 0; j < first_[i].size(); ++j) {
      m[j] = options_.beta1 * m[j] + (1.0 - options_.beta1) * g[j];
      v[j] = options_.beta2 * v[j] + (1.0 - options_.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      p[j] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

void AdamState::restore(std::uint64_t step, std::vector<Matrix> first, std::vector<Matrix> second) {
  if (first.size() != second.size()) throw ShapeError("adam restore: moment count mismatch");
  step_ = step;
  first_ = std::move(first);
  second_ = std::move(second);
}

}  // namespace fimgnn
