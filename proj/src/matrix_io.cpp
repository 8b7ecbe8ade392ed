#include "ata/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ata {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'T', 'A', 'M'};

template <class U>
void put_le(std::ostream& out, U value) {
  std::array<unsigned char, sizeof(U)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <class U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(Errc::io_error, "truncated matrix file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  U value;
  std::memcpy(&value, bytes.data(), sizeof(U));
  return value;
}

template <class T>
void write_impl(std::ostream& out, ConstView<T> m) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  put_le<std::uint64_t>(out, sizeof(T));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) put_le<T>(out, m(i, j));
  if (!out) throw Error(Errc::io_error, "failed to write matrix");
}

template <class T>
Matrix<T> read_body(std::istream& in, Index rows, Index cols) {
  Matrix<T> m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = get_le<T>(in);
  return m;
}

}  // namespace

void write_matrix(std::ostream& out, ConstView<float> m) { write_impl(out, m); }
void write_matrix(std::ostream& out, ConstView<double> m) { write_impl(out, m); }

AnyMatrix read_matrix(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(Errc::io_error, "not an ATAM matrix file");
  const auto rows = get_le<std::uint64_t>(in);
  const auto cols = get_le<std::uint64_t>(in);
  const auto width = get_le<std::uint64_t>(in);
  constexpr std::uint64_t limit = std::uint64_t{1} << 31;
  if (rows >= limit || cols >= limit) throw Error(Errc::io_error, "matrix dimensions out of range");
  const auto r = static_cast<Index>(rows), c = static_cast<Index>(cols);
  if (width == 4) return read_body<float>(in, r, c);
  if (width == 8) return read_body<double>(in, r, c);
  throw Error(Errc::io_error, "unsupported scalar width " + std::to_string(width));
}

void save_matrix(const std::string& path, const AnyMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  std::visit([&](const auto& mat) { write_matrix(out, cview(mat)); }, m);
}

AnyMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return read_matrix(in);
}

}  // namespace ata
