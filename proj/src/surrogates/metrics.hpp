#pragma once

#include "common/types.hpp"

#include <vector>

namespace romlab {

// sum_i ||u_i - u~_i||_2 / sum_i ||u_i||_2 over the columns (time instances).
double relative_error(const Matrix& U_ref, const Matrix& U_pred);

double max_relative_error(const std::vector<double>& errors);

}  // namespace romlab
