#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fimgnn/errors.hpp"
#include "fimgnn/graph.hpp"
#include "fimgnn/kmeans.hpp"
#include "fimgnn/manifest.hpp"
#include "fimgnn/mask.hpp"
#include "fimgnn/matrix_io.hpp"
#include "fimgnn/metrics.hpp"
#include "fimgnn/synthetic.hpp"
#include "fimgnn/view_dataset.hpp"
#include "support.hpp"

namespace fimgnn {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fimgnn_dataio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Fvm1, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Matrix m = testing::random_matrix(seed % 7, 1 + seed % 5, rng, 1e3);
    const auto bytes = encode_fvm1(m);
    EXPECT_EQ(bytes.size(), 20 + 8 * m.size());
    EXPECT_EQ(decode_fvm1(bytes), m);
  }
}

TEST(Fvm1, HeaderIsLittleEndian) {
  const auto bytes = encode_fvm1(Matrix(2, 3, 1.0));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FVM1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[12], 3);
  EXPECT_EQ(bytes[27], 0x3f);  // high byte of 1.0 in the first element
}

TEST(Fvm1, ErrorsCarryByteOffsets) {
  auto bytes = encode_fvm1(Matrix(2, 2, 1.0));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    decode_fvm1(bad_magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  try {
    decode_fvm1(std::span(bytes).first(10));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 10u);
  }
  try {
    decode_fvm1(std::span(bytes).first(30));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 30u);
  }
  bytes.push_back(0);
  try {
    decode_fvm1(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 52u);
  }
}

TEST(MatrixFiles, FvmAndCsvRoundTrip) {
  const fs::path dir = scratch_dir("files");
  Rng rng(1);
  const Matrix m = testing::random_matrix(4, 3, rng);
  save_matrix(dir / "m.fvm", m);
  EXPECT_EQ(load_matrix(dir / "m.fvm"), m);
  save_matrix(dir / "m.csv", m);
  EXPECT_EQ(load_matrix(dir / "m.csv"), m);
  const std::vector<std::int64_t> labels{3, 0, -1, 7};
  save_labels(dir / "labels.txt", labels);
  EXPECT_EQ(load_labels(dir / "labels.txt"), labels);
}

TEST(Mask, ZeroRatesKeepEverything) {
  const std::vector<double> rates{0, 0, 0};
  const PresenceMask m = generate_mask(50, rates, 3);
  EXPECT_EQ(m, PresenceMask(3, 50, true));
}

TEST(Mask, DropsExactCountsPerView) {
  const std::vector<double> rates{0.2, 0.2, 0.1};
  const PresenceMask m = generate_mask(2000, rates, 0);
  EXPECT_EQ(m.retained(0), 1600u);
  EXPECT_EQ(m.retained(1), 1600u);
  EXPECT_EQ(m.retained(2), 1800u);
  const std::vector<double> low{0.2, 0.05, 0.05};
  const PresenceMask l = generate_mask(1000, low, 0);
  EXPECT_EQ(l.missing(0), 200u);
  EXPECT_EQ(l.missing(1), 50u);
  EXPECT_EQ(l.missing(2), 50u);
}

TEST(Mask, EverySampleKeepsAViewAcrossSeeds) {
  const std::vector<double> rates{0.6, 0.5, 0.4};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PresenceMask m = generate_mask(200, rates, seed);
    for (std::size_t j = 0; j < 200; ++j) ASSERT_GE(m.views_present(j), 1u) << "seed " << seed;
    EXPECT_EQ(m.missing(0), 120u);
    EXPECT_EQ(m.missing(2), 80u);
  }
}

TEST(Mask, InfeasibleRatesThrow) {
  const std::vector<double> one_view{0.5};
  EXPECT_THROW(generate_mask(10, one_view, 0), std::invalid_argument);
  const std::vector<double> too_high{1.0, 0.0};
  EXPECT_THROW(generate_mask(10, too_high, 0), std::invalid_argument);
}

TEST(Mask, CsvRoundTripAndValidation) {
  const fs::path dir = scratch_dir("mask");
  const std::vector<double> rates{0.3, 0.1};
  const PresenceMask m = generate_mask(30, rates, 5);
  save_mask_csv(dir / "mask.csv", m);
  EXPECT_EQ(load_mask_csv(dir / "mask.csv"), m);
  std::ofstream(dir / "bad.csv") << "1,0\n1,2\n";
  EXPECT_THROW(load_mask_csv(dir / "bad.csv"), FormatError);
}

TEST(KnnGraph, LargeKGivesCompleteGraph) {
  Rng rng(2);
  const Matrix x = testing::random_matrix(6, 3, rng);
  const Matrix a = knn_graph(x, 5).to_dense();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(a(i, j), i == j ? 0.0 : 1.0);
}

TEST(KnnGraph, OrthogonalDuplicatePairs) {
  const Matrix x{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  const Matrix a = knn_graph(x, 1).to_dense();
  EXPECT_EQ(a, (Matrix{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}));
}

TEST(KnnGraph, SymmetricZeroDiagonalMinimumDegree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const CsrMatrix g = knn_graph(testing::random_matrix(10, 4, rng), 3);
    EXPECT_TRUE(g.is_symmetric());
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_FALSE(g.contains(i, i));
      EXPECT_GE(g.row_indices(i).size(), 3u);
    }
  }
}

TEST(KnnGraph, ZeroRowPicksNothingAndBadArgumentsThrow) {
  const Matrix x{{0, 0}, {1, 0}, {1, 0.1}};
  const CsrMatrix g = knn_graph(x, 1);
  EXPECT_TRUE(g.row_indices(0).empty());
  EXPECT_THROW(knn_graph(x, 0), std::invalid_argument);
  EXPECT_THROW(knn_graph(Matrix{{1.0}}, 1), std::invalid_argument);
}

TEST(NormalizeAdjacency, SingleEdge) {
  const Matrix n = normalize_adjacency(CsrMatrix::from_dense(Matrix{{0, 1}, {1, 0}})).to_dense();
  EXPECT_LT(max_abs_diff(n, Matrix{{0.5, 0.5}, {0.5, 0.5}}), 1e-15);
}

TEST(NormalizeAdjacency, EmptyGraphIsIdentity) {
  EXPECT_EQ(normalize_adjacency(CsrMatrix(4)).to_dense(), Matrix::identity(4));
}

TEST(NormalizeAdjacency, TriangleIsUniformThird) {
  const Matrix tri{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  const Matrix n = normalize_adjacency(CsrMatrix::from_dense(tri)).to_dense();
  EXPECT_LT(max_abs_diff(n, Matrix(3, 3, 1.0 / 3.0)), 1e-15);
}

TEST(NormalizeAdjacency, DiagonalIsInverseDegreePlusOne) {
  Rng rng(8);
  const CsrMatrix g = testing::random_graph(12, 0.3, rng);
  const CsrMatrix n = normalize_adjacency(g);
  EXPECT_TRUE(n.is_symmetric(1e-15));
  for (std::size_t i = 0; i < 12; ++i)
    EXPECT_NEAR(n.at(i, i), 1.0 / (static_cast<double>(g.row_indices(i).size()) + 1.0), 1e-15);
}

TEST(Synthetic, WellSeparatedViewsAreRecoverableByKMeans) {
  const std::vector<std::size_t> dims{8, 20, 3};
  const SyntheticData d = generate_synthetic(300, 3, dims, 10.0, 4);
  ASSERT_EQ(d.views.size(), 3u);
  for (const Matrix& v : d.views) {
    const auto labels = kmeans(v, 3, 1).labels;
    const std::vector<std::int64_t> pred(labels.begin(), labels.end());
    EXPECT_GE(clustering_accuracy(d.labels, pred), 0.95);
  }
}

TEST(Synthetic, DeterministicAndShaped) {
  const std::vector<std::size_t> dims{1000, 500, 250};
  const SyntheticData a = generate_synthetic(50, 5, dims, 6.0, 9);
  const SyntheticData b = generate_synthetic(50, 5, dims, 6.0, 9);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.views, b.views);
  EXPECT_EQ(a.views[0].cols(), 1000u);
  EXPECT_EQ(a.views[2].rows(), 50u);
}

TEST(Synthetic, EachSampleItsOwnCluster) {
  const std::vector<std::size_t> dims{4};
  const SyntheticData d = generate_synthetic(5, 5, dims, 1000.0, 2);
  const auto labels = kmeans(d.views[0], 5, 0).labels;
  const std::vector<std::int64_t> pred(labels.begin(), labels.end());
  EXPECT_EQ(clustering_accuracy(d.labels, pred), 1.0);
}

TEST(ViewDatasets, RetainedRowsAndOverlap) {
  const std::vector<std::size_t> dims{3, 2};
  const SyntheticData d = generate_synthetic(40, 2, dims, 5.0, 0);
  const std::vector<double> rates{0.25, 0.1};
  const PresenceMask mask = generate_mask(40, rates, 1);
  const auto views = build_view_datasets(d.views, mask, 4);
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[0].features.rows(), 30u);
  EXPECT_DOUBLE_EQ(views[0].missing_rate, 0.25);
  EXPECT_EQ(views[1].global_ids, mask.ids(1));
  const auto overlap = mask.overlap_ids();
  for (const auto& v : views) {
    ASSERT_EQ(v.overlap_rows.size(), overlap.size());
    for (std::size_t i = 0; i < overlap.size(); ++i) EXPECT_EQ(v.global_ids[v.overlap_rows[i]], overlap[i]);
    EXPECT_EQ(v.features.row(0)[0], d.views[v.view_id](v.global_ids[0], 0));
  }
}

TEST(Manifest, SaveLoadAndDataset) {
  const fs::path dir = scratch_dir("manifest");
  const std::vector<std::size_t> dims{3, 2};
  const SyntheticData d = generate_synthetic(12, 2, dims, 5.0, 0);
  Manifest m;
  m.name = "tiny";
  m.n_samples = 12;
  m.n_clusters = 2;
  for (std::size_t v = 0; v < 2; ++v) {
    save_matrix(dir / ("v" + std::to_string(v) + ".fvm"), d.views[v]);
    m.views.push_back({v, dir / ("v" + std::to_string(v) + ".fvm"), dims[v]});
  }
  save_labels(dir / "y.txt", d.labels);
  m.labels_path = dir / "y.txt";
  save_manifest(dir / "manifest.json", m);
  const LoadedDataset ds = load_dataset(dir / "manifest.json");
  EXPECT_EQ(ds.manifest.name, "tiny");
  EXPECT_EQ(ds.views, d.views);
  EXPECT_EQ(*ds.labels, d.labels);

  m.views[1].dim = 7;
  save_manifest(dir / "wrong.json", m);
  EXPECT_ANY_THROW(load_dataset(dir / "wrong.json"));
}

}  // namespace
}  // namespace fimgnn
