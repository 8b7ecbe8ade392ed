#pragma once

// Dense row-major storage, zero-copy sub-block views and the base-case
// kernels shared by every algorithm in the library.

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "ata/error.hpp"

namespace ata {

using Index = Eigen::Index;

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Mutable rectangular window into row-major storage. The outer stride is the
/// distance in scalars between consecutive rows of the underlying buffer.
template <class T>
using View = Eigen::Map<Matrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

template <class T>
using ConstView = Eigen::Map<const Matrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

template <class T>
View<T> view(Matrix<T>& m) {
  return View<T>(m.data(), m.rows(), m.cols(), Eigen::OuterStride<>(m.cols()));
}

template <class T>
ConstView<T> cview(const Matrix<T>& m) {
  return ConstView<T>(m.data(), m.rows(), m.cols(), Eigen::OuterStride<>(m.cols()));
}

template <class T>
ConstView<T> cview(const View<T>& v) {
  return ConstView<T>(v.data(), v.rows(), v.cols(), Eigen::OuterStride<>(v.outerStride()));
}

template <class T>
ConstView<T> cview(const ConstView<T>& v) {
  return v;
}

/// Window of `rows`×`cols` starting at (row, col) of `v`, sharing its stride.
template <class MapT>
MapT sub(MapT v, Index row, Index col, Index rows, Index cols) {
  return MapT(v.data() + row * v.outerStride() + col, rows, cols,
              Eigen::OuterStride<>(v.outerStride()));
}

template <class MapT>
struct Quadrants {
  MapT a11, a12, a21, a22;
};

/// Floor/ceil 2×2 split: the first block row/column takes ⌊·/2⌋ entries,
/// the second takes ⌈·/2⌉.
template <class MapT>
Quadrants<MapT> split4(MapT a) {
  if (a.rows() < 2 || a.cols() < 2) {
    throw Error(Errc::unsplittable, "cannot split a " + std::to_string(a.rows()) + "x" +
                                        std::to_string(a.cols()) + " block");
  }
  const Index m1 = a.rows() / 2, m2 = a.rows() - m1;
  const Index n1 = a.cols() / 2, n2 = a.cols() - n1;
  return {sub(a, 0, 0, m1, n1), sub(a, 0, n1, m1, n2), sub(a, m1, 0, m2, n1),
          sub(a, m1, n1, m2, n2)};
}

/// Counts scalar multiplications executed by the base-case kernels.
struct MultCounter {
  std::uint64_t scalar_mults = 0;
  bool enabled = true;

  void add(std::uint64_t n) {
    if (enabled) scalar_mults += n;
  }
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::shape_mismatch, what);
}

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

inline void count(MultCounter* counter, std::uint64_t n) {
  if (counter != nullptr) counter->add(n);
}

}  // namespace detail

/// dst += scale·src over the overlapping top-left rectangle. Shapes may differ
/// by at most one row and one column; this stands in for zero-padding the
/// smaller operand or dropping the larger one's trailing row/column.
template <class T>
void add_truncated(View<T> dst, ConstView<T> src, T scale) {
  if (std::abs(dst.rows() - src.rows()) > 1 || std::abs(dst.cols() - src.cols()) > 1) {
    throw Error(Errc::shape_mismatch, "add_truncated: shapes differ by more than one");
  }
  const Index rows = std::min(dst.rows(), src.rows());
  const Index cols = std::min(dst.cols(), src.cols());
  for (Index i = 0; i < rows; ++i) {
    T* d = dst.data() + i * dst.outerStride();
    const T* s = src.data() + i * src.outerStride();
    if (scale == T(1)) {
      for (Index j = 0; j < cols; ++j) d[j] += s[j];
    } else if (scale == T(-1)) {
      for (Index j = 0; j < cols; ++j) d[j] -= s[j];
    } else {
      for (Index j = 0; j < cols; ++j) d[j] += scale * s[j];
    }
  }
}

/// dst = x + sign·y where dst takes the elementwise-max shape of x and y and
/// each operand is zero-extended to it. sign must be +1 or -1.
template <class T>
void assign_sum(View<T> dst, ConstView<T> x, ConstView<T> y, int sign) {
  detail::require(dst.rows() == std::max(x.rows(), y.rows()) &&
                      dst.cols() == std::max(x.cols(), y.cols()),
                  "assign_sum: destination shape");
  for (Index i = 0; i < dst.rows(); ++i) {
    T* d = dst.data() + i * dst.outerStride();
    const Index xc = i < x.rows() ? x.cols() : 0;
    const Index yc = i < y.rows() ? y.cols() : 0;
    const T* xr = x.data() + i * x.outerStride();
    const T* yr = y.data() + i * y.outerStride();
    const Index both = std::min(xc, yc);
    if (sign > 0) {
      for (Index j = 0; j < both; ++j) d[j] = xr[j] + yr[j];
    } else {
      for (Index j = 0; j < both; ++j) d[j] = xr[j] - yr[j];
    }
    for (Index j = both; j < xc; ++j) d[j] = xr[j];
    for (Index j = both; j < yc; ++j) d[j] = sign > 0 ? yr[j] : -yr[j];
    for (Index j = std::max(xc, yc); j < dst.cols(); ++j) d[j] = T(0);
  }
}

/// Lower triangle of C += alpha·AᵀA. The strict upper triangle of C is
/// neither read nor written.
template <class T>
void naive_syrk_lower(ConstView<T> a, View<T> c, T alpha, MultCounter* counter = nullptr) {
  detail::require(c.rows() == a.cols() && c.cols() == a.cols(), "naive_syrk_lower");
  const Index m = a.rows(), n = a.cols();
  for (Index l = 0; l < m; ++l) {
    const T* arow = a.data() + l * a.outerStride();
    for (Index i = 0; i < n; ++i) {
      const T s = alpha * arow[i];
      T* crow = c.data() + i * c.outerStride();
      for (Index j = 0; j <= i; ++j) crow[j] += s * arow[j];
    }
  }
  detail::count(counter, static_cast<std::uint64_t>(m) * n * (n + 1) / 2);
}

/// C += alpha·AᵀB with A m×n, B m×k, C n×k. Same summation order as
/// naive_syrk_lower, so both agree bit-for-bit on the lower triangle.
template <class T>
void naive_gemm_atb(ConstView<T> a, ConstView<T> b, View<T> c, T alpha,
                    MultCounter* counter = nullptr) {
  detail::require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
                  "naive_gemm_atb");
  const Index m = a.rows(), n = a.cols(), k = b.cols();
  for (Index l = 0; l < m; ++l) {
    const T* arow = a.data() + l * a.outerStride();
    const T* brow = b.data() + l * b.outerStride();
    for (Index i = 0; i < n; ++i) {
      const T s = alpha * arow[i];
      T* crow = c.data() + i * c.outerStride();
      for (Index j = 0; j < k; ++j) crow[j] += s * brow[j];
    }
  }
  detail::count(counter, static_cast<std::uint64_t>(m) * n * k);
}

/// Row-concatenated lower triangle: row i contributes entries (i, 0..i).
template <class T>
struct PackedLowerTriangular {
  Index n = 0;
  std::vector<T> data;

  static constexpr std::size_t length(Index n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2;
  }
};

template <class T>
PackedLowerTriangular<T> pack_lower(ConstView<T> c) {
  detail::require(c.rows() == c.cols(), "pack_lower: C must be square");
  PackedLowerTriangular<T> p;
  p.n = c.rows();
  p.data.reserve(PackedLowerTriangular<T>::length(p.n));
  for (Index i = 0; i < p.n; ++i) {
    const T* row = c.data() + i * c.outerStride();
    p.data.insert(p.data.end(), row, row + i + 1);
  }
  return p;
}

template <class T>
void unpack_lower(const PackedLowerTriangular<T>& p, View<T> c) {
  detail::require(c.rows() == c.cols() && c.rows() == p.n &&
                      p.data.size() == PackedLowerTriangular<T>::length(p.n),
                  "unpack_lower");
  const T* src = p.data.data();
  for (Index i = 0; i < p.n; ++i) {
    std::copy(src, src + i + 1, c.data() + i * c.outerStride());
    src += i + 1;
  }
}

template <class T>
void mirror_lower_to_upper(View<T> c) {
  detail::require(c.rows() == c.cols(), "mirror_lower_to_upper: C must be square");
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = i + 1; j < c.cols(); ++j) c(i, j) = c(j, i);
  }
}

}  // namespace ata
