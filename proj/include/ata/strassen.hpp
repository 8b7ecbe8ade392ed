#pragma once

// Strassen's algorithm for C += alpha·AᵀB on arbitrary rectangular operands.
// Odd dimensions are handled by truncated/zero-extended additions rather than
// peeling or padding, and every intermediate lives in a workspace that is
// allocated once up front.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ata/matrix.hpp"

namespace ata {

/// Default base-case size in elements (m·n + m·k for AᵀB, m·n for AᵀA).
inline constexpr Index kDefaultThreshold = Index{1} << 15;

/// True when a Strassen call on (m, n, k) goes straight to the naive kernel.
/// A unit dimension always terminates, since halving it would leave an empty
/// block.
constexpr bool strassen_base_case(Index m, Index n, Index k, Index threshold) {
  return m <= 1 || n <= 1 || k <= 1 || m * n + m * k <= threshold;
}

constexpr Index ceil_half(Index x) { return x - x / 2; }

/// Scratch space for one Strassen call tree. Level l holds three regions: an
/// A-side operand sum (⌈m/2⌉×⌈n/2⌉), a B-side operand sum (⌈m/2⌉×⌈k/2⌉) and
/// a product buffer (⌈n/2⌉×⌈k/2⌉), where (m, n, k) are the level's problem
/// dimensions. Products at level l recurse into level l+1.
template <class T>
class StrassenWorkspace {
 public:
  struct Level {
    Index m, n, k;  // half dimensions covered by this level
    std::size_t sum_a, sum_b, product;  // offsets into the buffer
  };

  StrassenWorkspace() = default;

  StrassenWorkspace(Index m, Index n, Index k, Index threshold)
      : m_(m), n_(n), k_(k), threshold_(threshold) {
    if (m < 1 || n < 1 || k < 1 || threshold < 1) {
      throw Error(Errc::invalid_argument, "workspace dimensions and threshold must be >= 1");
    }
    std::size_t total = 0;
    while (!strassen_base_case(m, n, k, threshold)) {
      m = ceil_half(m);
      n = ceil_half(n);
      k = ceil_half(k);
      Level lvl{m, n, k, 0, 0, 0};
      lvl.sum_a = total;
      total += static_cast<std::size_t>(m * n);
      lvl.sum_b = total;
      total += static_cast<std::size_t>(m * k);
      lvl.product = total;
      total += static_cast<std::size_t>(n * k);
      levels_.push_back(lvl);
    }
    buffer_.assign(total, T(0));
  }

  std::size_t levels() const { return levels_.size(); }
  const Level& level(std::size_t l) const { return levels_.at(l); }
  std::size_t total_scalars() const { return buffer_.size(); }

  Index max_m() const { return m_; }
  Index max_n() const { return n_; }
  Index max_k() const { return k_; }
  Index threshold() const { return threshold_; }

  bool covers(Index m, Index n, Index k) const { return m <= m_ && n <= n_ && k <= k_; }

  View<T> sum_a(std::size_t l, Index rows, Index cols) {
    return region(levels_[l].sum_a, rows, cols);
  }
  View<T> sum_b(std::size_t l, Index rows, Index cols) {
    return region(levels_[l].sum_b, rows, cols);
  }
  View<T> product(std::size_t l, Index rows, Index cols) {
    return region(levels_[l].product, rows, cols);
  }

 private:
  View<T> region(std::size_t offset, Index rows, Index cols) {
    return View<T>(buffer_.data() + offset, rows, cols, Eigen::OuterStride<>(cols));
  }

  Index m_ = 0, n_ = 0, k_ = 0, threshold_ = 1;
  std::vector<Level> levels_;
  std::vector<T> buffer_;
};

template <class T>
StrassenWorkspace<T> workspace_for(Index m, Index n, Index k, Index threshold) {
  // An empty product needs no scratch at all.
  if (m == 0 || n == 0 || k == 0) return StrassenWorkspace<T>(1, 1, 1, threshold);
  return StrassenWorkspace<T>(m, n, k, threshold);
}

namespace detail {

template <class T>
class StrassenRecursion {
 public:
  StrassenRecursion(StrassenWorkspace<T>& ws, Index threshold, T alpha, MultCounter* counter)
      : ws_(ws), threshold_(threshold), alpha_(alpha), counter_(counter) {}

  void run(ConstView<T> a, ConstView<T> b, View<T> c, std::size_t level) {
    const Index m = a.rows(), n = a.cols(), k = b.cols();
    if (strassen_base_case(m, n, k, threshold_)) {
      naive_gemm_atb(a, b, c, alpha_, counter_);
      return;
    }
    if (level >= ws_.levels()) {
      throw Error(Errc::workspace_undersized,
                  "recursion needs level " + std::to_string(level) + " of " +
                      std::to_string(ws_.levels()));
    }
    const auto& lvl = ws_.level(level);
    if (ceil_half(m) > lvl.m || ceil_half(n) > lvl.n || ceil_half(k) > lvl.k) {
      throw Error(Errc::workspace_undersized, "level regions too small");
    }

    const auto A = split4(a);
    const auto B = split4(b);
    const auto C = split4(c);

    // M1 = (A11 + A22)ᵀ (B11 + B22)
    {
      auto s = sum_a(level, A.a11, A.a22, +1);
      auto t = sum_b(level, B.a11, B.a22, +1);
      auto p = multiply(level, s, t);
      add_truncated(C.a11, p, T(1));
      add_truncated(C.a22, p, T(1));
    }
    // M2 = (A12 + A22)ᵀ B11
    {
      auto s = sum_a(level, A.a12, A.a22, +1);
      auto p = multiply(level, s, B.a11);
      add_truncated(C.a21, p, T(1));
      add_truncated(C.a22, p, T(-1));
    }
    // M3 = A11ᵀ (B12 − B22)
    {
      auto t = sum_b(level, B.a12, B.a22, -1);
      auto p = multiply(level, A.a11, t);
      add_truncated(C.a12, p, T(1));
      add_truncated(C.a22, p, T(1));
    }
    // M4 = A22ᵀ (B21 − B11)
    {
      auto t = sum_b(level, B.a21, B.a11, -1);
      auto p = multiply(level, A.a22, t);
      add_truncated(C.a11, p, T(1));
      add_truncated(C.a21, p, T(1));
    }
    // M5 = (A11 + A21)ᵀ B22
    {
      auto s = sum_a(level, A.a11, A.a21, +1);
      auto p = multiply(level, s, B.a22);
      add_truncated(C.a11, p, T(-1));
      add_truncated(C.a12, p, T(1));
    }
    // M6 = (A12 − A11)ᵀ (B11 + B12)
    {
      auto s = sum_a(level, A.a12, A.a11, -1);
      auto t = sum_b(level, B.a11, B.a12, +1);
      auto p = multiply(level, s, t);
      add_truncated(C.a22, p, T(1));
    }
    // M7 = (A21 − A22)ᵀ (B21 + B22)
    {
      auto s = sum_a(level, A.a21, A.a22, -1);
      auto t = sum_b(level, B.a21, B.a22, +1);
      auto p = multiply(level, s, t);
      add_truncated(C.a11, p, T(1));
    }
  }

 private:
  ConstView<T> sum_a(std::size_t level, ConstView<T> x, ConstView<T> y, int sign) {
    auto dst = ws_.sum_a(level, std::max(x.rows(), y.rows()), std::max(x.cols(), y.cols()));
    assign_sum(dst, x, y, sign);
    return cview(dst);
  }

  ConstView<T> sum_b(std::size_t level, ConstView<T> x, ConstView<T> y, int sign) {
    auto dst = ws_.sum_b(level, std::max(x.rows(), y.rows()), std::max(x.cols(), y.cols()));
    assign_sum(dst, x, y, sign);
    return cview(dst);
  }

  // Product of zero-extended operands: a row present in only one of them
  // meets an implicit zero row in the other and is dropped.
  ConstView<T> multiply(std::size_t level, ConstView<T> s, ConstView<T> t) {
    const Index rows = std::min(s.rows(), t.rows());
    auto p = ws_.product(level, s.cols(), t.cols());
    p.setZero();
    run(sub(s, 0, 0, rows, s.cols()), sub(t, 0, 0, rows, t.cols()), p, level + 1);
    return cview(p);
  }

  StrassenWorkspace<T>& ws_;
  Index threshold_;
  T alpha_;
  MultCounter* counter_;
};

}  // namespace detail

/// C += alpha·AᵀB with A m×n, B m×k, C n×k. alpha is applied only where the
/// base-case kernel accumulates, so intermediates are never rescaled.
template <class T>
void fast_strassen(ConstView<T> a, ConstView<T> b, View<T> c, T alpha, StrassenWorkspace<T>& ws,
                   Index threshold = kDefaultThreshold, MultCounter* counter = nullptr) {
  detail::require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
                  "fast_strassen");
  if (threshold < 1) throw Error(Errc::invalid_argument, "threshold must be >= 1");
  if (!strassen_base_case(a.rows(), a.cols(), b.cols(), threshold) &&
      !ws.covers(a.rows(), a.cols(), b.cols())) {
    throw Error(Errc::workspace_undersized, "operands exceed workspace dimensions");
  }
  detail::StrassenRecursion<T>(ws, threshold, alpha, counter).run(a, b, c, 0);
}

/// Multiplications performed by Strassen with threshold 1 on n×n operands,
/// n a power of two: M(n) = 7·M(n/2), M(1) = 1.
constexpr std::uint64_t strassen_mult_count(std::uint64_t n) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error(Errc::unsupported_size, "strassen_mult_count needs a power of two");
  }
  std::uint64_t count = 1;
  for (; n > 1; n /= 2) count *= 7;
  return count;
}

}  // namespace ata
