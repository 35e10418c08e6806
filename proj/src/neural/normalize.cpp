#include "neural/normalize.hpp"

#include <cmath>

namespace romlab::nn {

Scaler Scaler::fit(const Matrix& X, ScaleKind kind) {
  require(X.cols() >= 1, "Scaler::fit: no samples");
  require(X.allFinite(), "Scaler::fit: non-finite data");
  Scaler s;
  s.kind = kind;
  const Index d = X.rows();
  s.shift = Vector::Zero(d);
  s.scale = Vector::Ones(d);
  switch (kind) {
    case ScaleKind::kIdentity:
      break;
    case ScaleKind::kStandardize: {
      s.shift = X.rowwise().mean();
      for (Index i = 0; i < d; ++i) {
        const double var = (X.row(i).array() - s.shift(i)).square().mean();
        if (var > 0.0) s.scale(i) = std::sqrt(var);
      }
      break;
    }
    case ScaleKind::kMinMax: {
      s.shift = X.rowwise().minCoeff();
      const Vector hi = X.rowwise().maxCoeff();
      for (Index i = 0; i < d; ++i) {
        if (hi(i) > s.shift(i)) s.scale(i) = hi(i) - s.shift(i);
      }
      break;
    }
    case ScaleKind::kMaxAbs: {
      const double m = X.cwiseAbs().maxCoeff();
      if (m > 0.0) s.scale.setConstant(m);
      break;
    }
  }
  return s;
}

Matrix Scaler::normalize(const Matrix& X) const {
  require_dims(X.rows() == dim(), "Scaler::normalize: feature count mismatch");
  return (X.colwise() - shift).array().colwise() / scale.array();
}

Matrix Scaler::denormalize(const Matrix& Xn) const {
  require_dims(Xn.rows() == dim(), "Scaler::denormalize: feature count mismatch");
  return (Xn.array().colwise() * scale.array()).matrix().colwise() + shift;
}

void Scaler::write(io::BinaryWriter& w) const {
  w.u64(static_cast<std::uint64_t>(kind));
  w.u64(static_cast<std::uint64_t>(dim()));
  w.f64s(shift.data(), static_cast<std::size_t>(dim()));
  w.f64s(scale.data(), static_cast<std::size_t>(dim()));
}

Scaler Scaler::read(io::BinaryReader& r) {
  Scaler s;
  const auto k = r.u64();
  if (k > 3) throw IoError("corrupt scaler kind");
  s.kind = static_cast<ScaleKind>(k);
  const auto d = static_cast<Index>(r.u64());
  s.shift.resize(d);
  s.scale.resize(d);
  r.f64s(s.shift.data(), static_cast<std::size_t>(d));
  r.f64s(s.scale.data(), static_cast<std::size_t>(d));
  return s;
}

}  // namespace romlab::nn
