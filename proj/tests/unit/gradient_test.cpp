#include <gtest/gtest.h>

#include "fimgnn/assignment.hpp"
#include "fimgnn/gnn.hpp"
#include "support.hpp"

namespace fimgnn {
namespace {

using testing::LossInstance;
using testing::make_loss_instance;
using testing::max_fd_error;
using testing::random_matrix;

TEST(Gradients, GcnTotalLossMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LossInstance inst = make_loss_instance(EncoderKind::Gcn, seed);
    EXPECT_LT(testing::total_loss_fd_error(inst), 1e-4) << "seed " << seed;
  }
}

TEST(Gradients, GcnSoftmaxOutputMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LossInstance inst = make_loss_instance(EncoderKind::Gcn, seed, 12, 6, 5, 3, 2, OutputActivation::Softmax);
    EXPECT_LT(testing::total_loss_fd_error(inst), 1e-4) << "seed " << seed;
  }
}

TEST(Gradients, GatTotalLossMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LossInstance inst = make_loss_instance(EncoderKind::Gat, seed);
    EXPECT_LT(testing::total_loss_fd_error(inst), 1e-4) << "seed " << seed;
  }
}

TEST(Gradients, ReconstructionLossFromEmbeddings) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 3 + seed % 8;
    Matrix z = random_matrix(n, 3, rng);
    const CsrMatrix target = with_self_loops(testing::random_graph(n, 0.4, rng));
    Matrix grad;
    reconstruction_loss_from_embeddings(target, z, &grad);
    EXPECT_LT(max_fd_error(z, grad, [&] { return reconstruction_loss_from_embeddings(target, z); }), 1e-4);
  }
}

TEST(Gradients, ClusteringLossWrtEmbeddingsAndCenters) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + seed % 9;
    const std::size_t k = 2 + seed % 3;
    Matrix z = random_matrix(n, 3, rng);
    Matrix u = random_matrix(k, 3, rng);
    const Matrix p = testing::random_distribution_rows(n, k, rng);
    Matrix gz, gu;
    clustering_loss(p, z, u, &gz, &gu);
    auto f = [&] { return clustering_loss(p, z, u); };
    EXPECT_LT(max_fd_error(z, gz, f), 1e-4) << "seed " << seed;
    EXPECT_LT(max_fd_error(u, gu, f), 1e-4) << "seed " << seed;
  }
}

TEST(Gradients, ZeroGammaLeavesCentersUntouched) {
  LossInstance inst = make_loss_instance(EncoderKind::Gcn, 7);
  LossGradients grads;
  const LossBreakdown loss = total_loss(inst.encoder, inst.graph, inst.centers, &inst.pseudo_labels, 0.0, &grads);
  EXPECT_EQ(grads.centers, Matrix(inst.centers.rows(), inst.centers.cols()));
  EXPECT_EQ(loss.total, loss.reconstruction);
  EXPECT_GT(loss.clustering, 0.0);
}

}  // namespace
}  // namespace fimgnn
