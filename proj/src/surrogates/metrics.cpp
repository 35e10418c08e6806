#include "surrogates/metrics.hpp"

#include "common/error.hpp"

#include <algorithm>

namespace romlab {

double relative_error(const Matrix& U_ref, const Matrix& U_pred) {
  require_dims(U_ref.rows() == U_pred.rows() && U_ref.cols() == U_pred.cols(),
               "relative_error: trajectory shapes differ");
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < U_ref.cols(); ++i) {
    num += (U_ref.col(i) - U_pred.col(i)).norm();
    den += U_ref.col(i).norm();
  }
  if (!(den > 0.0)) throw NumericError("relative_error: reference trajectory is zero");
  return num / den;
}

double max_relative_error(const std::vector<double>& errors) {
  require(!errors.empty(), "max_relative_error: no errors given");
  return *std::max_element(errors.begin(), errors.end());
}

}  // namespace romlab
