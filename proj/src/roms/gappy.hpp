#pragma once

#include "common/types.hpp"

#include <vector>

namespace romlab {

class FomModel;

// Evaluates selected rows of f (and their Jacobian rows) from the state
// restricted to the stencil closure of those rows.
class GappyNonlinearity {
 public:
  GappyNonlinearity(const FomModel& model, std::vector<Index> rows);

  const std::vector<Index>& rows() const { return rows_; }
  const std::vector<Index>& closure() const { return closure_; }
  Index size() const { return static_cast<Index>(rows_.size()); }

  // Rows of V at the closure.
  Matrix restrict(const Matrix& V) const;
  Vector restrict(const Vector& v) const;

  void eval(const Vector& u_closure, const Param& mu, Vector& f) const;
  // f at rows, plus G = J_f(rows, closure) * Vc.
  void eval_with_jacobian(const Vector& u_closure, const Param& mu, const Matrix& Vc, Vector& f,
                          Matrix& G) const;

 private:
  const FomModel* model_;
  std::vector<Index> rows_;
  std::vector<Index> closure_;
  std::vector<int> offsets_;  // into positions_, one span per row
  std::vector<Index> positions_;
};

}  // namespace romlab
