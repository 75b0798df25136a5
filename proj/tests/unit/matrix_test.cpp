#include <gtest/gtest.h>

#include "fimgnn/errors.hpp"
#include "fimgnn/matrix.hpp"
#include "fimgnn/sparse.hpp"
#include "support.hpp"

namespace fimgnn {
namespace {

TEST(Matrix, IdentityTimesMatrix) {
  Rng rng(1);
  const Matrix m = testing::random_matrix(3, 4, rng);
  EXPECT_EQ(matmul(Matrix::identity(3), m), m);
}

TEST(Matrix, ZerosTimesOnes) {
  EXPECT_EQ(matmul(Matrix(2, 3), Matrix(3, 4, 1.0)), Matrix(2, 4));
}

TEST(Matrix, SmallProductWithIdentity) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(a, Matrix{{1, 0}, {0, 1}}), a);
}

TEST(Matrix, ProductMatchesNaiveLoops) {
  Rng rng(2);
  const Matrix a = testing::random_matrix(5, 7, rng);
  const Matrix b = testing::random_matrix(7, 3, rng);
  const Matrix c = matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 7; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-12);
    }
  EXPECT_LT(max_abs_diff(matmul_tn(transpose(a), b), c), 1e-12);
  EXPECT_LT(max_abs_diff(matmul_nt(a, transpose(b)), c), 1e-12);
}

TEST(Matrix, DimensionMismatchThrowsShapeError) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  EXPECT_THROW(Matrix(2, 2) += Matrix(2, 3), ShapeError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>(3)), ShapeError);
  const std::vector<Matrix> blocks{Matrix(2, 1), Matrix(3, 1)};
  EXPECT_THROW(hconcat(blocks), ShapeError);
}

TEST(Matrix, PermutationsFollowDocumentedDirection) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  const std::vector<std::size_t> perm{2, 0, 1};
  EXPECT_EQ(permute_columns(a, perm), (Matrix{{3, 1, 2}, {6, 4, 5}}));
  const std::vector<std::size_t> rows{1, 0};
  EXPECT_EQ(permute_rows(a, rows), (Matrix{{4, 5, 6}, {1, 2, 3}}));
}

TEST(Matrix, ArgmaxPrefersLowestIndexOnTies) {
  const Matrix a{{0.5, 0.5}, {0.1, 0.9}, {1, 1}};
  EXPECT_EQ(argmax_rows(a), (std::vector<std::size_t>{0, 1, 0}));
}

TEST(Matrix, HconcatPlacesBlocksSideBySide) {
  const std::vector<Matrix> blocks{Matrix{{1}, {2}}, Matrix{{3, 4}, {5, 6}}};
  EXPECT_EQ(hconcat(blocks), (Matrix{{1, 3, 4}, {2, 5, 6}}));
}

TEST(Sparse, TripletsSumDuplicatesAndSortColumns) {
  const CsrMatrix m = CsrMatrix::from_triplets(2, 3, {{0, 2}, {0, 0}, {0, 2}, {1, 1}}, {1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_EQ(m.to_dense(), (Matrix{{2, 0, 4}, {0, 4, 0}}));
  EXPECT_EQ(m.row_indices(0)[0], 0u);
}

TEST(Sparse, ProductsMatchDense) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CsrMatrix s = testing::random_graph(9, 0.3, rng);
    const Matrix x = testing::random_matrix(9, 4, rng);
    EXPECT_LT(max_abs_diff(s.multiply(x), matmul(s.to_dense(), x)), 1e-12);
    EXPECT_LT(max_abs_diff(s.multiply_transposed(x), matmul_tn(s.to_dense(), x)), 1e-12);
  }
}

TEST(Sparse, InducedSubgraphReindexes) {
  const Matrix dense{{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}};
  const CsrMatrix g = CsrMatrix::from_dense(dense);
  const std::vector<std::size_t> keep{0, 1, 3};
  EXPECT_EQ(g.induced(keep).to_dense(), (Matrix{{0, 1, 1}, {1, 0, 0}, {1, 0, 0}}));
}

}  // namespace
}  // namespace fimgnn
