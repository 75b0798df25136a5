#pragma once

#include <cstddef>
#include <vector>

#include "fimgnn/matrix.hpp"

namespace fimgnn {

/// Minimum-cost perfect assignment on a square cost matrix.
/// Returns `assignment` with assignment[row] = column. O(k^3).
std::vector<std::size_t> hungarian(const Matrix& cost);

/// Total cost of an assignment.
double assignment_cost(const Matrix& cost, const std::vector<std::size_t>& assignment);

}  // namespace fimgnn
