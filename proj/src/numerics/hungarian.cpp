#include "fimgnn/hungarian.hpp"

#include <cmath>
#include <limits>

#include "fimgnn/errors.hpp"

namespace fimgnn {

// Shortest augmenting path formulation with row/column potentials.
std::vector<std::size_t> hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("hungarian: cost matrix must be square");
  if (!cost.all_finite()) throw std::invalid_argument("hungarian: non-finite cost");
  const std::size_t n = cost.rows();
  if (n == 0) return {};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based; index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    match_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j) assignment[match_col[j] - 1] = j - 1;
  return assignment;
}

double assignment_cost(const Matrix& cost, const std::vector<std::size_t>& assignment) {
  if (assignment.size() != cost.rows()) throw ShapeError("assignment_cost: length mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) total += cost(r, assignment[r]);
  return total;
}

}  // namespace fimgnn
