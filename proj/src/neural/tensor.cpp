#include "neural/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace romlab::nn {

Index numel(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

Shape prepend(Index n, const Shape& s) {
  Shape out;
  out.reserve(s.size() + 1);
  out.push_back(n);
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

void Tensor::reshape(Shape s) {
  require_dims(numel(s) == size(), "Tensor::reshape: " + shape_str(shape) + " -> " + shape_str(s));
  shape = std::move(s);
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace romlab::nn
