#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "opdyn/numlin.hpp"

using namespace opdyn::numlin;

namespace {

// Plain schoolbook product, kept independent of the repeated-squaring path.
DenseMatrix naive_mul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      Complex s{};
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  }
  return out;
}

DenseMatrix naive_pow(const DenseMatrix& a, unsigned m) {
  DenseMatrix out = DenseMatrix::identity(a.rows());
  for (unsigned i = 0; i < m; ++i) out = naive_mul(out, a);
  return out;
}

// Closed-form singular values of a 2x2 complex matrix via the eigenvalues of
// the Gram matrix.
double svd2x2_max(const DenseMatrix& a) {
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 2);
  double g00 = 0, g11 = 0;
  Complex g01{};
  for (std::size_t r = 0; r < 2; ++r) {
    g00 += std::norm(a(r, 0));
    g11 += std::norm(a(r, 1));
    g01 += std::conj(a(r, 0)) * a(r, 1);
  }
  double tr = g00 + g11;
  double det = g00 * g11 - std::norm(g01);
  double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return std::sqrt(0.5 * (tr + disc));
}

DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double re = u(rng), im = u(rng);
      double scale = std::sqrt(re * re + im * im);
      if (scale > 1.0) {
        re /= scale;
        im /= scale;
      }
      a(r, c) = Complex{re, im};
    }
  }
  return a;
}

double rel_diff(double a, double b) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("vec_norm on the stated examples") {
  CHECK(vec_norm(SparseVector{}) == 0.0);

  auto v = SparseVector::from_entries({{0, {1.0, 0.0}}, {5, {0.0, 1.0}}});
  CHECK(vec_norm(v) == std::sqrt(2.0));

  CHECK(vec_norm(SparseVector::basis(0, {3.0, 4.0})) == 5.0);
}

TEST_CASE("vec_norm scales homogeneously") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<Index> idx(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SparseVector::Entry> entries;
    int len = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < len; ++k) {
      entries.push_back({idx(rng), Complex{u(rng), u(rng)}});
    }
    auto v = SparseVector::from_entries(entries);
    Complex a{u(rng), u(rng)};
    CHECK(rel_diff(vec_norm(a * v), std::abs(a) * vec_norm(v)) < 1e-12);
  }
}

TEST_CASE("sparse vectors never store exact zeros") {
  auto v = SparseVector::from_entries({{3, {1.0, 0.0}}, {3, {-1.0, 0.0}}});
  CHECK(v.empty());
  auto w = SparseVector::basis(2) - SparseVector::basis(2);
  CHECK(w.empty());
  CHECK(SparseVector::basis(7, Complex{}).empty());
}

TEST_CASE("threshold pruning is opt-in") {
  auto v = SparseVector::from_entries({{0, {1e-14, 0.0}}, {1, {1.0, 0.0}}});
  CHECK(v.support_size() == 2);
  CHECK(v.pruned(1e-12).support_size() == 1);
}

TEST_CASE("non-finite entries are rejected") {
  CHECK_THROWS_AS(SparseVector::basis(0, {std::nan(""), 0.0}),
                  std::invalid_argument);
  double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(
      SparseVector::from_entries({{0, {inf, 0.0}}}), std::invalid_argument);
}

TEST_CASE("mat_pow: zeroth power is the identity") {
  std::mt19937_64 rng(7);
  auto a = random_matrix(rng, 3);
  CHECK(mat_pow(a, 0) == DenseMatrix::identity(3));
}

TEST_CASE("mat_pow: superdiagonal-2 nilpotent block dies at its size") {
  DenseMatrix w(4, 4);
  for (std::size_t j = 0; j + 1 < 4; ++j) w(j, j + 1) = Complex{2.0, 0.0};
  DenseMatrix expected = naive_pow(w, 4);  // oracle: repeated multiplication
  DenseMatrix got = mat_pow(w, 4);
  CHECK(got == expected);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(got(r, c) == Complex{});
  }
}

TEST_CASE("mat_pow: diagonal powers are exact") {
  DenseMatrix d(2, 2);
  d(0, 0) = Complex{0.5, 0.0};
  d(1, 1) = Complex{2.0, 0.0};
  DenseMatrix p = mat_pow(d, 3);
  CHECK(p(0, 0) == Complex{0.125, 0.0});
  CHECK(p(1, 1) == Complex{8.0, 0.0});
  CHECK(p(0, 1) == Complex{});
}

TEST_CASE("mat_pow rejects non-square input") {
  DenseMatrix a(2, 3);
  CHECK_THROWS_AS(mat_pow(a, 2), std::invalid_argument);
}

TEST_CASE("mat_pow is additive in the exponent") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<unsigned> exp(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_matrix(rng, 4);
    unsigned m = exp(rng), n = exp(rng);
    DenseMatrix lhs = mat_pow(a, m + n);
    DenseMatrix rhs = mat_pow(a, m) * mat_pow(a, n);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(std::abs(lhs(r, c) - rhs(r, c)) <=
              1e-10 * std::max(1.0, std::abs(lhs(r, c))));
      }
    }
  }
}

TEST_CASE("op_norm_estimate on a diagonal matrix") {
  DenseMatrix d(2, 2);
  d(0, 0) = Complex{0.3, 0.0};
  d(1, 1) = Complex{0.7, 0.0};
  auto est = op_norm_estimate(d, 1e-12, 2000);
  CHECK(rel_diff(est.estimate, 0.7) < 1e-9);
  CHECK(est.estimate <= est.upper_bound + 1e-12);
}

TEST_CASE("op_norm_estimate matches the 2x2 SVD oracle") {
  double eps = 0.025;
  DenseMatrix a(2, 2);
  a(0, 0) = Complex{-eps, 0.0};
  a(0, 1) = Complex{2 * eps, 0.0};
  a(1, 1) = Complex{-eps, 0.0};
  auto est = op_norm_estimate(a, 1e-12, 5000);
  double oracle = svd2x2_max(a);  // (1 + sqrt(2)) * eps
  CHECK(rel_diff(est.estimate, oracle) < 1e-8);
  CHECK(est.estimate >= eps);
  CHECK(est.estimate <= 3 * eps);
  CHECK(est.upper_bound == doctest::Approx(3 * eps).epsilon(1e-14));
}

TEST_CASE("op_norm_estimate of the zero matrix") {
  DenseMatrix z(5, 5);
  auto est = op_norm_estimate(z);
  CHECK(est.estimate == 0.0);
  CHECK(est.upper_bound == 0.0);
}

TEST_CASE("op_norm_estimate never exceeds its upper bound") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    auto a = random_matrix(rng, 2 + trial % 5);
    auto est = op_norm_estimate(a, 1e-10, 2000);
    CHECK(est.estimate <= est.upper_bound + 1e-12);
  }
  // diagonal matrices: estimate equals the largest modulus
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    DenseMatrix d(4, 4);
    double expected = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      Complex v{u(rng), u(rng)};
      d(i, i) = v;
      expected = std::max(expected, std::abs(v));
    }
    auto est = op_norm_estimate(d, 1e-12, 5000);
    CHECK(rel_diff(est.estimate, expected) < 1e-8);
  }
}

TEST_CASE("inverse round-trips on well-conditioned matrices") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 2 + trial % 4;
    DenseMatrix a = DenseMatrix::identity(n);
    auto r = random_matrix(rng, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) += 0.3 * r(i, j);
    }
    DenseMatrix prod = a * inverse(a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Complex expected = i == j ? Complex{1.0, 0.0} : Complex{};
        CHECK(std::abs(prod(i, j) - expected) < 1e-10);
      }
    }
  }
  DenseMatrix singular(2, 2);
  singular(0, 0) = Complex{1.0, 0.0};
  singular(1, 0) = Complex{1.0, 0.0};
  CHECK_THROWS_AS(inverse(singular), std::invalid_argument);
}

TEST_CASE("nth_root is exact on powers of two") {
  for (long long n = 1; n <= 64; ++n) {
    double norm = std::ldexp(1.0, static_cast<int>(n));  // 2^n
    CHECK(nth_root(norm, n) == 2.0);
  }
  CHECK(nth_root(0.0, 5) == 0.0);
  CHECK(nth_root(81.0, 4) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("binomial matches Pascal recursion") {
  for (long long n = 0; n <= 20; ++n) {
    for (long long k = 0; k <= n; ++k) {
      double pascal = (k == 0 || k == n)
                          ? 1.0
                          : binomial(n - 1, k - 1) + binomial(n - 1, k);
      CHECK(binomial(n, k) == doctest::Approx(pascal).epsilon(1e-12));
    }
  }
  CHECK(binomial(5, 7) == 0.0);
}

TEST_CASE("pow_int agrees with repeated multiplication") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Complex z{u(rng), u(rng)};
    Complex acc{1.0, 0.0};
    for (unsigned e = 0; e <= 12; ++e) {
      CHECK(std::abs(pow_int(z, e) - acc) <= 1e-12 * std::max(1.0, std::abs(acc)));
      acc *= z;
    }
  }
}
