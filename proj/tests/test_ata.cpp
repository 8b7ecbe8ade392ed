#include <doctest.h>

#include <Eigen/Dense>

#include "ata/ata.hpp"
#include "test_util.hpp"

using namespace ata;
using ata::testing::max_abs;
using ata::testing::random_matrix;

namespace {

Matrix<double> lower_ata(const Matrix<double>& a, Index threshold, MultCounter* counter = nullptr) {
  Matrix<double> c = Matrix<double>::Zero(a.cols(), a.cols());
  auto ws = ata_workspace<double>(a.rows(), a.cols(), threshold);
  ata::ata(cview(a), view(c), 1.0, threshold, ws, counter);
  return c;
}

double lower_error(const Matrix<double>& c, const Matrix<double>& ref) {
  double worst = 0;
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j <= i; ++j) worst = std::max(worst, std::abs(c(i, j) - ref(i, j)));
  return worst;
}

}  // namespace

TEST_CASE("ata examples") {
  SUBCASE("1x1") {
    Matrix<double> a(1, 1);
    a << 2;
    CHECK(lower_ata(a, 1)(0, 0) == 4);
  }
  SUBCASE("6x4 against the syrk kernel") {
    Matrix<double> a = random_matrix(6, 4, 1);
    Matrix<double> ref = Matrix<double>::Zero(4, 4);
    naive_syrk_lower(cview(a), view(ref), 1.0);
    Matrix<double> c = lower_ata(a, 1);
    Matrix<double> diff = (c - ref).triangularView<Eigen::Lower>();
    Matrix<double> ref_lower = ref.triangularView<Eigen::Lower>();
    CHECK(diff.norm() / ref_lower.norm() <= 1e-10);
  }
  SUBCASE("4x4 with threshold 1 uses 38 multiplications") {
    MultCounter counter;
    lower_ata(random_matrix(4, 4, 2), 1, &counter);
    CHECK(counter.scalar_mults == 38);
  }
  SUBCASE("shape mismatch") {
    Matrix<double> a = random_matrix(5, 4, 3);
    Matrix<double> c = Matrix<double>::Zero(5, 5);
    auto ws = ata_workspace<double>(5, 4, 1);
    CHECK_THROWS_AS(ata::ata(cview(a), view(c), 1.0, 1, ws), Error);
  }
}

TEST_CASE("ata_mult_count closed form") {
  CHECK(ata_mult_count(1) == 1);
  CHECK(ata_mult_count(2) == 6);
  CHECK(ata_mult_count(16) == 1686);
  CHECK_THROWS_AS(ata_mult_count(12), Error);
}

TEST_CASE("counter matches the closed form and approaches 2/3 of Strassen") {
  double previous_ratio = 1.0;
  for (Index n = 1; n <= 32; n *= 2) {
    MultCounter counter;
    lower_ata(random_matrix(n, n, static_cast<std::uint64_t>(n)), 1, &counter);
    const auto un = static_cast<std::uint64_t>(n);
    CHECK(counter.scalar_mults == ata_mult_count(un));
    const double ratio =
        static_cast<double>(counter.scalar_mults) / static_cast<double>(strassen_mult_count(un));
    CHECK(ratio >= 2.0 / 3.0);
    CHECK(ratio <= previous_ratio);
    previous_ratio = ratio;
  }
}

TEST_CASE("ata_full") {
  SUBCASE("identity") {
    Matrix<double> a = Matrix<double>::Identity(5, 5);
    CHECK(ata_full(a, 1) == Matrix<double>::Identity(5, 5));
  }
  SUBCASE("single row gives a rank-one outer product") {
    Matrix<double> v = random_matrix(1, 9, 5);
    Matrix<double> c = ata_full(v, 1);
    Matrix<double> outer = v.transpose() * v;
    CHECK((c - outer).cwiseAbs().maxCoeff() == 0.0);
    Eigen::FullPivLU<Matrix<double>> lu(c);
    CHECK(lu.rank() == 1);
  }
  SUBCASE("result is exactly symmetric") {
    Matrix<double> c = ata_full(random_matrix(37, 23, 6), 8);
    CHECK(c == c.transpose());
  }
}

TEST_CASE("oracle sweep over shapes") {
  std::uint64_t seed = 1;
  auto check_shape = [&](Index m, Index n, Index threshold) {
    Matrix<double> a = random_matrix(m, n, seed++);
    Matrix<double> ref = a.transpose() * a;
    const double tol = 1e-9 * static_cast<double>(m) * max_abs(a) * max_abs(a);
    INFO("m=" << m << " n=" << n << " threshold=" << threshold);
    REQUIRE(lower_error(lower_ata(a, threshold), ref) <= tol);
  };
  for (Index m = 1; m <= 64; ++m)
    for (Index n = 1; n <= 64; ++n) check_shape(m, n, 1);
  for (Index m : {100, 257, 512})
    for (Index n : {1, 2, 7, 16, 31, 32}) check_shape(m, n, 1);
}

TEST_CASE("upper triangle is never written") {
  for (Index n : {2, 3, 10, 33}) {
    Matrix<double> a = random_matrix(n + 3, n, static_cast<std::uint64_t>(n));
    Matrix<double> c = Matrix<double>::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) c(i, j) = 1e300 + static_cast<double>(i * n + j);
    const Matrix<double> before = c;
    auto ws = ata_workspace<double>(n + 3, n, 1);
    ata::ata(cview(a), view(c), 1.0, 1, ws);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) REQUIRE(c(i, j) == before(i, j));
  }
}

TEST_CASE("result is positive semidefinite at small scale") {
  Matrix<double> a = random_matrix(40, 24, 77);
  Matrix<double> c = ata_full(a, 1);
  const double tol = 1e-9 * 40;
  for (Index i = 0; i < c.rows(); ++i) {
    CHECK(c(i, i) >= 0);
    for (Index j = 0; j < i; ++j) CHECK(c(i, i) * c(j, j) - c(i, j) * c(j, i) >= -tol);
  }
}

TEST_CASE("threshold does not change the result beyond rounding") {
  Matrix<double> a = random_matrix(90, 70, 8);
  Matrix<double> ref = a.transpose() * a;
  const double tol = 1e-9 * 90 * max_abs(a) * max_abs(a);
  for (Index threshold : {1, 64, 4096}) CHECK(lower_error(lower_ata(a, threshold), ref) <= tol);
}

TEST_CASE("single precision") {
  Matrix<float> a = random_matrix<float>(50, 30, 9);
  Matrix<float> c = ata_full(a, 16);
  const auto ref = ata::testing::reference_ata(a);
  CHECK(ata::testing::max_abs_error(c, ref, false) <= 1e-4 * 50);
}
