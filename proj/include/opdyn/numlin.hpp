#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace opdyn::numlin {

using Complex = std::complex<double>;
using Index = std::int64_t;

inline bool is_finite(Complex c) {
  return std::isfinite(c.real()) && std::isfinite(c.imag());
}

/// Finitely supported complex vector indexed by arbitrary integers.
///
/// Entries are kept sorted by index and exact zeros are never stored, so
/// support queries and annihilation checks are exact. Norms accumulate in
/// ascending index order; given the same entries the result is reproducible
/// bit for bit.
class SparseVector {
 public:
  using Entry = std::pair<Index, Complex>;

  SparseVector() = default;

  /// c * e_i (empty when c == 0).
  static SparseVector basis(Index i, Complex c = Complex{1.0, 0.0});

  /// Builds from arbitrary (index, value) pairs; duplicate indices are summed.
  static SparseVector from_entries(std::vector<Entry> entries);

  /// All-ones vector on the index range [lo, lo + count).
  static SparseVector ones(Index lo, Index count);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t support_size() const { return entries_.size(); }
  Index min_index() const;
  Index max_index() const;

  /// Value at index i (zero when absent).
  Complex at(Index i) const;

  double norm_sq() const;
  double norm() const;

  SparseVector scaled(Complex a) const;

  /// Drops entries with |value| <= threshold. Exact zeros are already never
  /// stored; threshold pruning is strictly opt-in.
  SparseVector pruned(double threshold) const;

  friend SparseVector operator+(const SparseVector& a, const SparseVector& b);
  friend SparseVector operator-(const SparseVector& a, const SparseVector& b);
  friend SparseVector operator*(Complex a, const SparseVector& v);
  bool operator==(const SparseVector& other) const = default;

 private:
  explicit SparseVector(std::vector<Entry> sorted_nonzero)
      : entries_(std::move(sorted_nonzero)) {}

  std::vector<Entry> entries_;  // sorted by index, no exact zeros, all finite
};

double vec_norm(const SparseVector& v);

/// Row-major dense complex matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(const std::vector<std::vector<Complex>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  Complex operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<const Complex> data() const { return data_; }

  std::vector<Complex> apply(std::span<const Complex> x) const;
  std::vector<Complex> apply_adjoint(std::span<const Complex> x) const;

  bool is_upper_triangular() const;
  bool is_lower_triangular() const;
  double max_abs_diagonal() const;

  void check_finite(const std::string& context) const;

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// A^m by repeated squaring; A^0 is the identity. Rejects non-square input.
DenseMatrix mat_pow(const DenseMatrix& a, unsigned long long m);

struct OpNormEstimate {
  double estimate = 0.0;     // power iteration on A*A, approaches from below
  double upper_bound = 0.0;  // sqrt(max row 1-norm * max column 1-norm)
};

using RealMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Largest singular value via power iteration on the Gram map, stopped when
/// successive Rayleigh quotients agree to a relative tol or at max_iter.
/// `apply` maps in_dim reals to out_dim reals, `apply_adjoint` the reverse.
/// The returned value approaches the true norm from below.
double singular_value_estimate(std::size_t in_dim, std::size_t out_dim,
                               const RealMap& apply,
                               const RealMap& apply_adjoint, double tol,
                               int max_iter);

/// Dense wrapper around singular_value_estimate; the complex matrix is lifted
/// to interleaved (re, im) real coordinates, which preserves singular values.
OpNormEstimate op_norm_estimate(const DenseMatrix& a, double tol = 1e-10,
                                int max_iter = 1000);

/// Inverse via partially pivoted Gauss-Jordan. Throws on singular input.
DenseMatrix inverse(const DenseMatrix& a);

/// x^(1/n). Exact powers of two take an integer exponent path so that e.g.
/// the 64th root of 2^64 is exactly 2.
double nth_root(double x, long long n);

/// Binomial coefficient as a double via the multiplicative formula.
double binomial(long long n, long long k);

/// z^e by binary exponentiation (deterministic across platforms).
Complex pow_int(Complex z, unsigned long long e);

}  // namespace opdyn::numlin
