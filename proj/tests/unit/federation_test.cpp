#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fimgnn/errors.hpp"
#include "fimgnn/federation.hpp"
#include "fimgnn/synthetic.hpp"
#include "support.hpp"

namespace fimgnn {
namespace {

namespace fs = std::filesystem;

RunData small_data(std::vector<double> rates = {0.2, 0.2, 0.1}, std::uint64_t seed = 3) {
  const std::vector<std::size_t> dims{8, 6, 5};
  SyntheticData syn = generate_synthetic(60, 3, dims, 8.0, seed);
  PresenceMask mask = generate_mask(60, rates, seed);
  std::vector<Matrix> views(syn.views.begin(), syn.views.begin() + static_cast<long>(rates.size()));
  return prepare_run_data("small", views, mask, 3, syn.labels, 5);
}

RunConfig small_config(std::size_t rounds = 3) {
  RunConfig c;
  c.e_rounds = rounds;
  c.t_epochs = 2;
  c.pretrain_epochs = 10;
  c.gcn_dims = {12, 4};
  c.gat_dims = {12, 4};
  c.seed = 5;
  return c;
}

std::string trace_text(const RunResult& r) {
  std::string out;
  for (const auto& j : r.trace) out += j.dump() + "\n";
  return out;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("fimgnn_federation_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(FinalPredict, AveragesPresentViews) {
  // Sample 0 appears in both views: (0.6,0.4)+(0.1,0.9) averages to (0.35,0.65).
  const std::vector<Matrix> q{Matrix{{0.6, 0.4}, {0.8, 0.2}}, Matrix{{0.1, 0.9}}};
  const std::vector<std::vector<std::size_t>> ids{{0, 1}, {0}};
  EXPECT_EQ(final_predict(q, ids, 2), (std::vector<std::int64_t>{1, 0}));
}

TEST(FinalPredict, RejectsUncoveredSamplesAndBadShapes) {
  const std::vector<Matrix> q{Matrix{{0.5, 0.5}}};
  const std::vector<std::vector<std::size_t>> ids{{0}};
  EXPECT_THROW(final_predict(q, ids, 2), std::invalid_argument);
  const std::vector<std::vector<std::size_t>> two{{0, 1}};
  EXPECT_THROW(final_predict(q, two, 2), ShapeError);
}

TEST(Federation, MessageFlowIsUploadsThenOneBroadcastPerRound) {
  RunData data = small_data();
  Federation fed(std::move(data), small_config(3));
  const RunResult r = fed.run();
  ASSERT_EQ(r.trace.size(), 3u * 4u);
  for (std::size_t round = 1; round <= 3; ++round) {
    const std::size_t base = (round - 1) * 4;
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(r.trace[base + i]["direction"], "upload");
      EXPECT_EQ(r.trace[base + i]["round"], round);
      EXPECT_EQ(r.trace[base + i]["overlap_digest"], r.trace[0]["overlap_digest"]);
      EXPECT_EQ(r.trace[base + i]["loss"]["clustering"].is_null(), round == 1);
    }
    EXPECT_EQ(r.trace[base + 3]["direction"], "broadcast");
    EXPECT_TRUE(r.trace[base + 3]["view_id"].is_null());
  }
  EXPECT_EQ(r.report.rounds.size(), 3u);
  EXPECT_EQ(fed.completed_rounds(), 3u);
  EXPECT_TRUE(validate_report_json(to_json(r.report)).empty());
}

TEST(Federation, SingleRoundIsPretrainOnly) {
  Federation fed(small_data(), small_config(1));
  const RunResult r = fed.run();
  ASSERT_EQ(r.report.rounds.size(), 1u);
  for (const auto& c : r.report.rounds[0].clients) EXPECT_FALSE(c.clustering_loss.has_value());
  ASSERT_TRUE(r.report.final_scores.has_value());
  EXPECT_EQ(r.predictions.size(), 60u);
}

TEST(Federation, CompleteSingleViewRuns) {
  Federation fed(small_data({0.0}), small_config(2));
  const RunResult r = fed.run();
  ASSERT_EQ(r.report.rounds.size(), 2u);
  EXPECT_DOUBLE_EQ(r.report.rounds[1].clients[0].weight, 1.0 + std::log(2.0));
  EXPECT_GE(r.report.final_scores->acc, 0.9);
}

TEST(Federation, IdenticalInputsGiveIdenticalBytesAcrossThreadCounts) {
  RunConfig one = small_config(3);
  RunConfig four = one;
  four.threads = 4;
  const RunResult a = Federation(small_data(), one).run();
  const RunResult b = Federation(small_data(), one).run();
  const RunResult c = Federation(small_data(), four).run();
  EXPECT_EQ(to_json(a.report).dump(), to_json(b.report).dump());
  EXPECT_EQ(to_json(a.report).dump(), to_json(c.report).dump());
  EXPECT_EQ(trace_text(a), trace_text(c));
  EXPECT_EQ(a.predictions, c.predictions);
}

TEST(Federation, ResumeFromCheckpointMatchesUninterruptedRun) {
  const fs::path dir = fresh_dir("resume");
  const RunResult full = Federation(small_data(), small_config(4)).run(dir);
  ASSERT_TRUE(fs::exists(dir / "round_0002" / "meta.json"));

  Federation resumed = Federation::resume(dir / "round_0002", small_data());
  EXPECT_EQ(resumed.completed_rounds(), 2u);
  const RunResult tail = resumed.run();
  EXPECT_EQ(to_json(tail.report).dump(), to_json(full.report).dump());
  EXPECT_EQ(trace_text(tail), trace_text(full));
  EXPECT_EQ(tail.predictions, full.predictions);
  fs::remove_all(dir);
}

TEST(Federation, ResumeRejectsDifferentData) {
  const fs::path dir = fresh_dir("mismatch");
  Federation(small_data(), small_config(1)).run(dir);
  EXPECT_THROW(Federation::resume(dir / "round_0001", small_data({0.2, 0.2, 0.1}, 4)), ProtocolError);
  fs::remove_all(dir);
}

TEST(Federation, EmptyOverlapIsProtocolError) {
  // Two views that share no sample.
  const std::vector<std::size_t> dims{4, 4};
  SyntheticData syn = generate_synthetic(20, 2, dims, 8.0, 1);
  PresenceMask mask(2, 20, false);
  for (std::size_t j = 0; j < 20; ++j) mask.set(j % 2, j, true);
  RunData data = prepare_run_data("split", syn.views, mask, 2, syn.labels, 3);
  EXPECT_THROW(Federation(std::move(data), small_config(2)), ProtocolError);
}

TEST(Federation, InvalidConfigIsRejected) {
  RunConfig c = small_config(0);
  EXPECT_THROW(Federation(small_data(), c), std::invalid_argument);
}

TEST(Federation, KMeansRelabellingLeavesScoresUnchanged) {
  const RunResult base = Federation(small_data(), small_config(3)).run();
  RunHooks hooks;
  hooks.on_kmeans = [](std::size_t, KMeansResult& r) {
    // Rotate cluster ids 0->1->2->0.
    for (auto& l : r.labels) l = (l + 1) % 3;
    Matrix c = r.centers;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t d = 0; d < c.cols(); ++d) r.centers((k + 1) % 3, d) = c(k, d);
  };
  const RunResult permuted = Federation(small_data(), small_config(3), hooks).run();
  EXPECT_EQ(base.predictions, permuted.predictions);
  EXPECT_EQ(base.report.final_scores->acc, permuted.report.final_scores->acc);
}

TEST(Report, RoundTripAndValidation) {
  const RunResult r = Federation(small_data(), small_config(2)).run();
  const nlohmann::ordered_json j = to_json(r.report);
  EXPECT_EQ(to_json(metrics_report_from_json(j)).dump(), j.dump());

  nlohmann::json bad = j;
  bad["rounds"][1]["round"] = 5;
  EXPECT_FALSE(validate_report_json(bad).empty());
  bad = j;
  bad.erase("final");
  EXPECT_FALSE(validate_report_json(bad).empty());
  bad = j;
  bad["rounds"].erase(1);
  EXPECT_FALSE(validate_report_json(bad).empty());
}

}  // namespace
}  // namespace fimgnn
