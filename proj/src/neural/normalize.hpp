#pragma once

#include "common/binio.hpp"
#include "common/types.hpp"

#include <string>

namespace romlab::nn {

enum class ScaleKind { kIdentity = 0, kStandardize = 1, kMinMax = 2, kMaxAbs = 3 };

// Affine feature scaling x_n = (x - shift) / scale on column-sample matrices.
// kMaxAbs uses one global scale for all rows.
struct Scaler {
  ScaleKind kind = ScaleKind::kIdentity;
  Vector shift;
  Vector scale;

  static Scaler fit(const Matrix& X, ScaleKind kind);
  Matrix normalize(const Matrix& X) const;
  Matrix denormalize(const Matrix& Xn) const;
  Index dim() const { return shift.size(); }

  void write(io::BinaryWriter& w) const;
  static Scaler read(io::BinaryReader& r);
};

}  // namespace romlab::nn
