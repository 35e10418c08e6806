#pragma once

#include "common/error.hpp"
#include "common/types.hpp"

#include <string>
#include <vector>

namespace romlab::nn {

using Shape = std::vector<Index>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
// Vectorized kernels peel loops by address, so summation order (and the last
// bits of results) would depend on where a buffer lands. Full-packet
// alignment keeps repeated runs bit-identical.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

Index numel(const Shape& s);
std::string shape_str(const Shape& s);
Shape prepend(Index n, const Shape& s);

// Dense row-major (C-order) tensor. Axis 0 is the batch when used by layers.
struct Tensor {
  Shape shape;
  Buffer data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(static_cast<std::size_t>(numel(shape)), fill) {}

  Index size() const { return static_cast<Index>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  Index batch() const { return shape.empty() ? 0 : shape[0]; }
  Index sample_size() const { return batch() == 0 ? 0 : size() / batch(); }
  Shape sample_shape() const { return Shape(shape.begin() + 1, shape.end()); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  // batch x sample_size view
  RowMap rows() { return RowMap(ptr(), batch(), sample_size()); }
  ConstRowMap rows() const { return ConstRowMap(ptr(), batch(), sample_size()); }

  void reshape(Shape s);
  void fill(double v);
  bool all_finite() const;
};

}  // namespace romlab::nn
