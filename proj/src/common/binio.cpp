#include "common/binio.hpp"

#include <iomanip>
#include <limits>

namespace romlab::io {

namespace {

std::array<char, 8> pad_magic(std::string_view magic) {
  std::array<char, 8> m{};
  std::memcpy(m.data(), magic.data(), std::min<std::size_t>(magic.size(), 8));
  return m;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::string& path, std::string_view magic)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw IoError("cannot open '" + path + "' for writing");
  const auto m = pad_magic(magic);
  raw(m.data(), m.size());
}

void BinaryWriter::raw(const void* p, std::size_t bytes) {
  out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
  if (!out_) throw IoError("write failed on '" + path_ + "'");
}

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  raw(s.data(), s.size());
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw IoError("close failed on '" + path_ + "'");
}

BinaryReader::BinaryReader(const std::string& path, std::string_view magic)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw IoError("cannot open '" + path + "'");
  std::array<char, 8> m{};
  raw(m.data(), m.size());
  if (m != pad_magic(magic)) {
    throw IoError("'" + path + "' is not a " + std::string(magic) + " container");
  }
}

void BinaryReader::raw(void* p, std::size_t bytes) {
  in_.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (!in_) throw IoError("truncated container '" + path_ + "'");
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v = 0;
  raw(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v = 0;
  raw(&v, sizeof v);
  return v;
}

void BinaryReader::f64s(double* p, std::size_t count) { raw(p, count * sizeof(double)); }

std::string BinaryReader::str() {
  const auto len = u64();
  if (len > (1u << 30)) throw IoError("corrupt string length in '" + path_ + "'");
  std::string s(len, '\0');
  raw(s.data(), len);
  return s;
}

Matrix BinaryReader::matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  f64s(m.data(), static_cast<std::size_t>(m.size()));
  return m;
}

bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

std::string peek_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 8> m{};
  if (!in.read(m.data(), 8)) return {};
  std::string s(m.data(), 8);
  while (!s.empty() && s.back() == '\0') s.pop_back();
  return s;
}

void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  if (!header.empty()) out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace romlab::io
