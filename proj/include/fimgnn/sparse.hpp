#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fimgnn/matrix.hpp"

namespace fimgnn {

// Compressed sparse row matrix. Column indices are sorted within each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::size_t n) : rows_(n), cols_(n), row_ptr_(n + 1, 0) {}

  /// Builds from (row, col, value) triplets; duplicates are summed.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<std::pair<std::size_t, std::size_t>> coords,
                                 std::vector<double> values);
  /// Nonzero entries of a dense matrix.
  static CsrMatrix from_dense(const Matrix& dense);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_idx_.size(); }

  std::span<const std::size_t> row_indices(std::size_t r) const noexcept {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::size_t row_begin(std::size_t r) const noexcept { return row_ptr_[r]; }
  std::size_t row_end(std::size_t r) const noexcept { return row_ptr_[r + 1]; }
  std::size_t col(std::size_t k) const noexcept { return col_idx_[k]; }
  double value(std::size_t k) const noexcept { return values_[k]; }

  /// Value at (r, c), zero when absent. Binary search within the row.
  double at(std::size_t r, std::size_t c) const noexcept;
  bool contains(std::size_t r, std::size_t c) const noexcept;

  Matrix to_dense() const;
  bool is_symmetric(double tol = 0.0) const;

  /// this * dense
  Matrix multiply(const Matrix& dense) const;
  /// this^T * dense
  Matrix multiply_transposed(const Matrix& dense) const;

  /// Submatrix keeping the listed rows/columns (same index set for both), re-indexed.
  CsrMatrix induced(std::span<const std::size_t> keep) const;

  bool operator==(const CsrMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

}  // namespace fimgnn
