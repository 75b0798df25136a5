#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fimgnn {

// Dense row-major matrix of doubles. Value type; copies are deep.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Rows picked in the given order.
Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows);
/// Columns permuted so that out(:, j) = a(:, perm[j]).
Matrix permute_columns(const Matrix& a, std::span<const std::size_t> perm);
/// Rows permuted so that out(i, :) = a(perm[i], :).
Matrix permute_rows(const Matrix& a, std::span<const std::size_t> perm);
/// Side-by-side concatenation; all blocks must share a row count.
Matrix hconcat(std::span<const Matrix> blocks);

double sum(const Matrix& a) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);
/// Row-wise argmax, lowest index wins ties.
std::vector<std::size_t> argmax_rows(const Matrix& a);
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op);

}  // namespace fimgnn
