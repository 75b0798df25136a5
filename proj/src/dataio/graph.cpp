#include "fimgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fimgnn {

CsrMatrix knn_graph(const Matrix& features, std::size_t k) {
  const std::size_t n = features.rows();
  if (k == 0) throw std::invalid_argument("knn_graph: k must be positive");
  if (n < 2) throw std::invalid_argument("knn_graph: need at least two rows");

  Matrix unit = features;
  std::vector<bool> zero_norm(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = unit.row(r);
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      zero_norm[r] = true;
      continue;
    }
    for (double& v : row) v /= norm;
  }
  const Matrix sim = matmul_nt(unit, unit);

  const std::size_t take = std::min(k, n - 1);
  std::vector<std::vector<std::size_t>> nbrs(n);
  std::vector<std::size_t> cand;
  for (std::size_t j = 0; j < n; ++j) {
    if (zero_norm[j]) continue;
    cand.clear();
    for (std::size_t r = 0; r < n; ++r)
      if (r != j) cand.push_back(r);
    auto more_similar = [&](std::size_t a, std::size_t b) {
      if (sim(j, a) != sim(j, b)) return sim(j, a) > sim(j, b);
      return a < b;
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                      more_similar);
    for (std::size_t i = 0; i < take; ++i) {
      nbrs[j].push_back(cand[i]);
      nbrs[cand[i]].push_back(j);
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t j = 0; j < n; ++j) {
    auto& list = nbrs[j];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (std::size_t r : list) coords.emplace_back(j, r);
  }
  std::vector<double> ones(coords.size(), 1.0);
  return CsrMatrix::from_triplets(n, n, std::move(coords), std::move(ones));
}

CsrMatrix normalize_adjacency(const CsrMatrix& adjacency) {
  const CsrMatrix looped = with_self_loops(adjacency);
  const std::size_t n = looped.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t r = 0; r < n; ++r) {
    double degree = 0.0;
    for (double v : looped.row_values(r)) degree += v;
    inv_sqrt[r] = 1.0 / std::sqrt(degree);
  }
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  std::vector<double> values;
  coords.reserve(looped.nnz());
  values.reserve(looped.nnz());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = looped.row_begin(r); k < looped.row_end(r); ++k) {
      const std::size_t c = looped.col(k);
      coords.emplace_back(r, c);
      values.push_back(looped.value(k) * inv_sqrt[r] * inv_sqrt[c]);
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(coords), std::move(values));
}

CsrMatrix with_self_loops(const CsrMatrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw std::invalid_argument("adjacency must be square");
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  std::vector<double> values;
  for (std::size_t r = 0; r < n; ++r) {
    coords.emplace_back(r, r);
    values.push_back(1.0);
    for (std::size_t c : adjacency.row_indices(r)) {
      if (c == r) continue;
      coords.emplace_back(r, c);
      values.push_back(1.0);
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(coords), std::move(values));
}

}  // namespace fimgnn
