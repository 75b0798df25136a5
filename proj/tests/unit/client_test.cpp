#include <gtest/gtest.h>

#include <cmath>

#include "fimgnn/client.hpp"
#include "fimgnn/errors.hpp"
#include "fimgnn/kmeans.hpp"
#include "fimgnn/mask.hpp"
#include "fimgnn/metrics.hpp"
#include "fimgnn/synthetic.hpp"
#include "support.hpp"

namespace fimgnn {
namespace {

ViewDataset blob_view(std::size_t view, std::uint64_t seed, std::size_t n = 60, std::size_t k = 3) {
  const std::vector<std::size_t> dims{6, 5};
  const SyntheticData d = generate_synthetic(n, k, dims, 8.0, seed);
  const std::vector<double> rates{0.2, 0.1};
  const PresenceMask mask = generate_mask(n, rates, seed);
  return build_view_datasets(d.views, mask, 5).at(view);
}

ClientOptions small_options(EncoderKind kind, std::size_t k = 3) {
  ClientOptions o;
  o.kind = kind;
  o.hidden_dim = 8;
  o.embed_dim = 4;
  o.num_clusters = k;
  o.seed = 11;
  return o;
}

TEST(SelectEncoder, FollowsThreshold) {
  EXPECT_EQ(select_encoder(0.05, 0.1), EncoderKind::Gcn);
  EXPECT_EQ(select_encoder(0.2, 0.1), EncoderKind::Gat);
  EXPECT_EQ(select_encoder(0.1, 0.1), EncoderKind::Gcn);
}

TEST(SoftAssign, Examples) {
  EXPECT_EQ(soft_assign(Matrix{{3, 4}}, Matrix{{0, 0}}), Matrix{{1.0}});
  const Matrix eq = soft_assign(Matrix{{0.0}}, Matrix{{-1.0}, {1.0}});
  EXPECT_DOUBLE_EQ(eq(0, 0), 0.5);
  const Matrix q = soft_assign(Matrix{{0.0}}, Matrix{{0.0}, {1.0}});
  EXPECT_NEAR(q(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(q(0, 1), 1.0 / 3.0, 1e-15);
}

TEST(SoftAssign, RowsSumToOne) {
  Rng rng(1);
  const Matrix q = soft_assign(testing::random_matrix(20, 3, rng, 5.0), testing::random_matrix(4, 3, rng));
  for (std::size_t r = 0; r < 20; ++r) {
    double s = 0.0;
    for (double v : q.row(r)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(KlLoss, Examples) {
  const Matrix p{{0.3, 0.7}, {0.5, 0.5}};
  EXPECT_EQ(kl_loss(p, p), 0.0);
  EXPECT_NEAR(kl_loss(Matrix{{1, 0}}, Matrix{{0.5, 0.5}}), std::log(2.0), 1e-15);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    EXPECT_GE(kl_loss(testing::random_distribution_rows(5, 3, rng), testing::random_distribution_rows(5, 3, rng)), 0.0);
  }
}

TEST(Client, PretrainReducesReconstructionAndInitialisesCenters) {
  for (EncoderKind kind : {EncoderKind::Gcn, EncoderKind::Gat}) {
    Client c(blob_view(0, 3), small_options(kind));
    const auto trace = c.pretrain(50);
    ASSERT_EQ(trace.size(), 51u);
    EXPECT_LT(trace.back(), trace.front());
    const KMeansResult km = kmeans(c.full_embeddings(), 3, derive_seed(11, 0, 2));
    EXPECT_EQ(c.centers(), km.centers);
  }
}

TEST(Client, ZeroEpochPretrainKeepsParameters) {
  Client c(blob_view(1, 4), small_options(EncoderKind::Gcn));
  const Encoder before = c.encoder();
  c.pretrain(0);
  EXPECT_EQ(std::get<GcnEncoder>(before).w0, std::get<GcnEncoder>(c.encoder()).w0);
  EXPECT_EQ(c.centers().rows(), 3u);
}

TEST(Client, ArgmaxOfQAgreesWithKMeansOnEmbeddings) {
  Client c(blob_view(0, 5, 120), small_options(EncoderKind::Gcn));
  c.pretrain(50);
  const auto q_labels = argmax_rows(c.full_soft_assignments());
  const auto km = kmeans(c.full_embeddings(), 3, derive_seed(11, 0, 2)).labels;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < km.size(); ++i) agree += q_labels[i] == km[i];
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(km.size()), 0.9);
}

// Reconstruction-only Adam written out independently of Client.
template <typename Enc>
Enc recon_only(Enc enc, const GraphBatch& g, double lr, std::size_t epochs) {
  std::vector<Matrix*> params;
  if constexpr (std::is_same_v<Enc, GcnEncoder>) {
    params = {&enc.w0, &enc.w1};
  } else {
    params = {&enc.w0, &enc.a0, &enc.w1, &enc.a1};
  }
  const std::vector<const Matrix*> shapes(params.begin(), params.end());
  AdamState adam({.lr = lr}, shapes);
  for (std::size_t e = 0; e < epochs; ++e) {
    Matrix gz;
    std::vector<Matrix> grads;
    if constexpr (std::is_same_v<Enc, GcnEncoder>) {
      GcnCache cache;
      const Matrix z = gcn_forward(enc, g, &cache);
      reconstruction_loss_from_embeddings(g.neighborhoods, z, &gz);
      grads = gcn_backward(enc, g, cache, gz);
    } else {
      GatCache cache;
      const Matrix z = gat_forward(enc, g, &cache);
      reconstruction_loss_from_embeddings(g.neighborhoods, z, &gz);
      grads = gat_backward(enc, g, cache, gz);
    }
    std::vector<const Matrix*> gp;
    for (const auto& m : grads) gp.push_back(&m);
    adam.step(params, gp);
  }
  return enc;
}

TEST(Client, ZeroGammaIsBitwiseReconstructionOnlyTraining) {
  for (EncoderKind kind : {EncoderKind::Gcn, EncoderKind::Gat}) {
    Client c(blob_view(0, 6), small_options(kind));
    c.pretrain(5);
    const Encoder start = c.encoder();
    const Matrix centers = c.centers();
    Rng rng(9);
    const Matrix p = testing::random_distribution_rows(c.overlap_size(), 3, rng);
    for (int round = 0; round < 3; ++round) c.local_train_round(p, 0.0, 4);
    EXPECT_EQ(c.centers(), centers);
    if (kind == EncoderKind::Gcn) {
      const GcnEncoder ref = recon_only(std::get<GcnEncoder>(start), c.overlap_graph(), 0.001, 12);
      EXPECT_EQ(std::get<GcnEncoder>(c.encoder()).w0, ref.w0);
      EXPECT_EQ(std::get<GcnEncoder>(c.encoder()).w1, ref.w1);
    } else {
      const GatEncoder ref = recon_only(std::get<GatEncoder>(start), c.overlap_graph(), 0.001, 12);
      EXPECT_EQ(std::get<GatEncoder>(c.encoder()).w0, ref.w0);
      EXPECT_EQ(std::get<GatEncoder>(c.encoder()).a1, ref.a1);
    }
  }
}

TEST(Client, LocalRoundReturnsOverlapEmbeddings) {
  Client c(blob_view(1, 7), small_options(EncoderKind::Gat));
  c.pretrain(3);
  Rng rng(1);
  const Matrix p = testing::random_distribution_rows(c.overlap_size(), 3, rng);
  const LocalRoundResult r = c.local_train_round(p, 1.0, 2);
  EXPECT_EQ(r.overlap_embeddings, c.overlap_embeddings());
  EXPECT_EQ(r.overlap_embeddings.rows(), c.overlap_size());
  EXPECT_EQ(r.centers, c.centers());
  EXPECT_GT(r.last_loss.clustering, 0.0);
  EXPECT_THROW(c.local_train_round(Matrix(2, 3, 1.0 / 3), 1.0, 1), ProtocolError);
}

TEST(Client, AlignToRecoversPermutedPseudoLabels) {
  Client c(blob_view(0, 8), small_options(EncoderKind::Gcn));
  c.pretrain(20);
  const Matrix q = c.overlap_rows_of(c.full_soft_assignments());
  const Matrix before = c.centers();
  // Pseudo-labels equal to the client's own Q with columns rotated.
  const std::vector<std::size_t> rot{2, 0, 1};
  const Matrix p = permute_columns(q, rot);
  const auto rows = c.align_to(p);
  EXPECT_EQ(rows, rot);
  EXPECT_EQ(c.centers(), permute_rows(before, rot));
  EXPECT_EQ(argmax_rows(c.overlap_rows_of(c.full_soft_assignments())), argmax_rows(p));
  // A second alignment against the same target is the identity.
  EXPECT_EQ(c.align_to(p), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Client, TooFewRowsForClustersIsProtocolError) {
  Client c(blob_view(0, 9, 12, 2), small_options(EncoderKind::Gcn, 12));
  EXPECT_THROW(c.pretrain(1), ProtocolError);
}

}  // namespace
}  // namespace fimgnn
