#pragma once

#include "common/rng.hpp"
#include "common/types.hpp"

#include <filesystem>
#include <string>

namespace romlab::test {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = rng.uniform(-1.0, 1.0);
  return M;
}

// Fresh scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("romlab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace romlab::test
