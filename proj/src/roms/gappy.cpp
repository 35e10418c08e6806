#include "roms/gappy.hpp"

#include "common/error.hpp"
#include "fom/model.hpp"

#include <algorithm>
#include <unordered_map>

namespace romlab {

GappyNonlinearity::GappyNonlinearity(const FomModel& model, std::vector<Index> rows)
    : model_(&model), rows_(std::move(rows)) {
  require(model.max_stencil() <= 16, "gappy: stencils wider than 16 are not supported");
  std::vector<Index> cols(static_cast<std::size_t>(model.max_stencil()));
  std::vector<Index> all;
  for (Index r : rows_) {
    require(r >= 0 && r < model.dim(), "gappy: row out of range");
    const int k = model.stencil(r, cols.data());
    all.insert(all.end(), cols.begin(), cols.begin() + k);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  closure_ = all;
  std::unordered_map<Index, Index> where;
  for (std::size_t k = 0; k < closure_.size(); ++k) where[closure_[k]] = static_cast<Index>(k);
  offsets_.push_back(0);
  for (Index r : rows_) {
    const int k = model.stencil(r, cols.data());
    for (int s = 0; s < k; ++s) positions_.push_back(where.at(cols[static_cast<std::size_t>(s)]));
    offsets_.push_back(static_cast<int>(positions_.size()));
  }
}

Matrix GappyNonlinearity::restrict(const Matrix& V) const {
  Matrix out(static_cast<Index>(closure_.size()), V.cols());
  for (std::size_t k = 0; k < closure_.size(); ++k) out.row(static_cast<Index>(k)) = V.row(closure_[k]);
  return out;
}

Vector GappyNonlinearity::restrict(const Vector& v) const {
  Vector out(static_cast<Index>(closure_.size()));
  for (std::size_t k = 0; k < closure_.size(); ++k) out[static_cast<Index>(k)] = v[closure_[k]];
  return out;
}

void GappyNonlinearity::eval(const Vector& uc, const Param& mu, Vector& f) const {
  f.resize(size());
  double vals[16];
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const int b = offsets_[k], e = offsets_[k + 1];
    for (int s = b; s < e; ++s) vals[s - b] = uc[positions_[static_cast<std::size_t>(s)]];
    f[static_cast<Index>(k)] = model_->f_row(rows_[k], vals, mu);
  }
}

void GappyNonlinearity::eval_with_jacobian(const Vector& uc, const Param& mu, const Matrix& Vc,
                                           Vector& f, Matrix& G) const {
  f.resize(size());
  G.setZero(size(), Vc.cols());
  double vals[16];
  double grad[16];
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const int b = offsets_[k], e = offsets_[k + 1];
    for (int s = b; s < e; ++s) vals[s - b] = uc[positions_[static_cast<std::size_t>(s)]];
    f[static_cast<Index>(k)] = model_->f_row_grad(rows_[k], vals, mu, grad);
    for (int s = b; s < e; ++s) {
      G.row(static_cast<Index>(k)) += grad[s - b] * Vc.row(positions_[static_cast<std::size_t>(s)]);
    }
  }
}

}  // namespace romlab
