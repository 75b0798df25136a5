#include <gtest/gtest.h>

#include <cmath>

#include "fimgnn/adam.hpp"

namespace fimgnn {
namespace {

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Matrix p{{1.5, -2.0}};
  const Matrix g(1, 2);
  const std::vector<const Matrix*> shapes{&p};
  AdamState adam({}, shapes);
  const std::vector<Matrix*> params{&p};
  const std::vector<const Matrix*> grads{&g};
  for (int i = 0; i < 5; ++i) adam.step(params, grads);
  EXPECT_EQ(p, (Matrix{{1.5, -2.0}}));
  EXPECT_EQ(adam.step_count(), 5u);
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  Matrix p{{1.0, 1.0, 1.0}};
  const Matrix g{{3.0, -0.25, 1e-3}};
  const std::vector<const Matrix*> shapes{&p};
  AdamState adam({.lr = 0.01}, shapes);
  const std::vector<Matrix*> params{&p};
  const std::vector<const Matrix*> grads{&g};
  adam.step(params, grads);
  EXPECT_NEAR(p(0, 0), 0.99, 1e-8);
  EXPECT_NEAR(p(0, 1), 1.01, 1e-8);
  EXPECT_NEAR(p(0, 2), 0.99, 1e-7);
}

TEST(Adam, QuadraticDecreasesMonotonically) {
  Matrix x{{1.0}};
  const std::vector<const Matrix*> shapes{&x};
  AdamState adam({.lr = 0.1}, shapes);
  const std::vector<Matrix*> params{&x};
  double prev = std::abs(x(0, 0));
  for (int i = 0; i < 8; ++i) {
    const Matrix g{{2.0 * x(0, 0)}};
    const std::vector<const Matrix*> grads{&g};
    adam.step(params, grads);
    EXPECT_LT(std::abs(x(0, 0)), prev) << "step " << i;
    prev = std::abs(x(0, 0));
  }
}

TEST(Adam, ShapeMismatchThrows) {
  Matrix p(2, 2);
  const Matrix g(2, 3);
  const std::vector<const Matrix*> shapes{&p};
  AdamState adam({}, shapes);
  const std::vector<Matrix*> params{&p};
  const std::vector<const Matrix*> grads{&g};
  EXPECT_THROW(adam.step(params, grads), std::invalid_argument);
}

}  // namespace
}  // namespace fimgnn
