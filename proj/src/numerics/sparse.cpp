#include "fimgnn/sparse.hpp"

#include <algorithm>
#include <numeric>

#include "fimgnn/errors.hpp"

namespace fimgnn {

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<std::pair<std::size_t, std::size_t>> coords,
                                   std::vector<double> values) {
  if (coords.size() != values.size()) throw ShapeError("from_triplets: length mismatch");
  std::vector<std::size_t> order(coords.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return coords[a] < coords[b]; });

  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  bool have_prev = false;
  std::pair<std::size_t, std::size_t> prev;
  for (std::size_t idx : order) {
    const auto [r, c] = coords[idx];
    if (r >= rows || c >= cols) throw ShapeError("from_triplets: index out of range");
    if (have_prev && coords[idx] == prev) {
      m.values_.back() += values[idx];
      continue;
    }
    m.col_idx_.push_back(c);
    m.values_.push_back(values[idx]);
    ++m.row_ptr_[r + 1];
    prev = coords[idx];
    have_prev = true;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

CsrMatrix CsrMatrix::from_dense(const Matrix& dense) {
  CsrMatrix m;
  m.rows_ = dense.rows();
  m.cols_ = dense.cols();
  m.row_ptr_.assign(m.rows_ + 1, 0);
  for (std::size_t r = 0; r < dense.rows(); ++r) {
    for (std::size_t c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) {
        m.col_idx_.push_back(c);
        m.values_.push_back(dense(r, c));
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const noexcept {
  auto idx = row_indices(r);
  auto it = std::lower_bound(idx.begin(), idx.end(), c);
  if (it == idx.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - idx.begin())];
}

bool CsrMatrix::contains(std::size_t r, std::size_t c) const noexcept {
  auto idx = row_indices(r);
  return std::binary_search(idx.begin(), idx.end(), c);
}

Matrix CsrMatrix::to_dense() const {
  Matrix out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out(r, col_idx_[k]) = values_[k];
  return out;
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t c = col_idx_[k];
      if (!contains(c, r)) return false;
      const double diff = values_[k] - at(c, r);
      if (diff > tol || -diff > tol) return false;
    }
  }
  return true;
}

Matrix CsrMatrix::multiply(const Matrix& dense) const {
  if (dense.rows() != cols_) throw ShapeError("csr multiply: inner dimension mismatch");
  Matrix out(rows_, dense.cols());
  const std::size_t w = dense.cols();
  for (std::size_t r = 0; r < rows_; ++r) {
    double* dst = out.row(r).data();
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = values_[k];
      const double* src = dense.row(col_idx_[k]).data();
      for (std::size_t c = 0; c < w; ++c) dst[c] += v * src[c];
    }
  }
  return out;
}

Matrix CsrMatrix::multiply_transposed(const Matrix& dense) const {
  if (dense.rows() != rows_) throw ShapeError("csr multiply_transposed: inner dimension mismatch");
  Matrix out(cols_, dense.cols());
  const std::size_t w = dense.cols();
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* src = dense.row(r).data();
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = values_[k];
      double* dst = out.row(col_idx_[k]).data();
      for (std::size_t c = 0; c < w; ++c) dst[c] += v * src[c];
    }
  }
  return out;
}

CsrMatrix CsrMatrix::induced(std::span<const std::size_t> keep) const {
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> remap(std::max(rows_, cols_), kAbsent);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= rows_ || keep[i] >= cols_) throw ShapeError("induced: index out of range");
    remap[keep[i]] = i;
  }
  CsrMatrix m;
  m.rows_ = keep.size();
  m.cols_ = keep.size();
  m.row_ptr_.assign(keep.size() + 1, 0);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t r = keep[i];
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t c = remap[col_idx_[k]];
      if (c != kAbsent) entries.emplace_back(c, values_[k]);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [c, v] : entries) {
      m.col_idx_.push_back(c);
      m.values_.push_back(v);
    }
    m.row_ptr_[i + 1] = m.col_idx_.size();
  }
  return m;
}

}  // namespace fimgnn
