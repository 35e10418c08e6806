#pragma once

#include "common/error.hpp"
#include "common/types.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace romlab::io {

// Little helpers for the 8-byte-magic binary containers. All integers are
// written as uint64, all reals as IEEE double, in host (little-endian) order.
class BinaryWriter {
 public:
  BinaryWriter(const std::string& path, std::string_view magic);

  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void f64s(const double* p, std::size_t count) { raw(p, count * sizeof(double)); }
  void str(const std::string& s);
  void matrix(const Matrix& m) { f64s(m.data(), static_cast<std::size_t>(m.size())); }
  void close();

 private:
  void raw(const void* p, std::size_t bytes);
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
 public:
  BinaryReader(const std::string& path, std::string_view magic);

  std::uint64_t u64();
  double f64();
  void f64s(double* p, std::size_t count);
  std::string str();
  Matrix matrix(Index rows, Index cols);
  bool at_end();

 private:
  void raw(void* p, std::size_t bytes);
  std::ifstream in_;
  std::string path_;
};

// Returns the 8-byte magic at the head of a file ("" if unreadable).
std::string peek_magic(const std::string& path);

// Writes a matrix as CSV, one row per line, optional header line.
void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {});

}  // namespace romlab::io
