#pragma once

// Recursive lower-triangular AᵀA: four self-recursions for the diagonal
// blocks and two Strassen products for the off-diagonal block per level.

#include <cstdint>

#include "ata/matrix.hpp"
#include "ata/strassen.hpp"

namespace ata {

constexpr bool ata_base_case(Index m, Index n, Index threshold) {
  return m <= 1 || n <= 1 || m * n <= threshold;
}

/// Workspace large enough for every Strassen call made by ata on an m×n input.
template <class T>
StrassenWorkspace<T> ata_workspace(Index m, Index n, Index threshold) {
  if (m < 2 || n < 2) return StrassenWorkspace<T>(1, 1, 1, threshold);
  return StrassenWorkspace<T>(ceil_half(m), ceil_half(n), n / 2, threshold);
}

namespace detail {

template <class T>
void ata_recursive(ConstView<T> a, View<T> c, T alpha, Index threshold, StrassenWorkspace<T>& ws,
                   MultCounter* counter) {
  if (ata_base_case(a.rows(), a.cols(), threshold)) {
    naive_syrk_lower(a, c, alpha, counter);
    return;
  }
  const auto A = split4(a);
  const auto C = split4(c);
  ata_recursive(A.a11, C.a11, alpha, threshold, ws, counter);
  ata_recursive(A.a21, C.a11, alpha, threshold, ws, counter);
  ata_recursive(A.a12, C.a22, alpha, threshold, ws, counter);
  ata_recursive(A.a22, C.a22, alpha, threshold, ws, counter);
  fast_strassen(A.a12, A.a11, C.a21, alpha, ws, threshold, counter);
  fast_strassen(A.a22, A.a21, C.a21, alpha, ws, threshold, counter);
}

}  // namespace detail

/// Lower triangle of C += alpha·AᵀA for A m×n and C n×n. The strict upper
/// triangle of C is never touched.
template <class T>
void ata(ConstView<T> a, View<T> c, T alpha, Index threshold, StrassenWorkspace<T>& ws,
         MultCounter* counter = nullptr) {
  detail::require(c.rows() == a.cols() && c.cols() == a.cols(), "ata: C must be n x n");
  if (threshold < 1) throw Error(Errc::invalid_argument, "threshold must be >= 1");
  detail::ata_recursive(a, c, alpha, threshold, ws, counter);
}

/// Full symmetric AᵀA with a freshly allocated workspace.
template <class T>
Matrix<T> ata_full(ConstView<T> a, Index threshold = kDefaultThreshold,
                   MultCounter* counter = nullptr) {
  Matrix<T> c = Matrix<T>::Zero(a.cols(), a.cols());
  auto ws = ata_workspace<T>(a.rows(), a.cols(), threshold);
  ata(a, view(c), T(1), threshold, ws, counter);
  mirror_lower_to_upper(view(c));
  return c;
}

template <class T>
Matrix<T> ata_full(const Matrix<T>& a, Index threshold = kDefaultThreshold,
                   MultCounter* counter = nullptr) {
  return ata_full(cview(a), threshold, counter);
}

/// Multiplications performed by ata with threshold 1 on an n×n input, n a
/// power of two: (2/3)·7^j + (1/3)·4^j for n = 2^j.
constexpr std::uint64_t ata_mult_count(std::uint64_t n) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error(Errc::unsupported_size, "ata_mult_count needs a power of two");
  }
  std::uint64_t p7 = 1, p4 = 1;
  for (; n > 1; n /= 2) {
    p7 *= 7;
    p4 *= 4;
  }
  return (2 * p7 + p4) / 3;
}

}  // namespace ata
