#include "opdyn/numlin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opdyn::numlin {

namespace {

void check_entry_finite(Index i, Complex c) {
  if (!is_finite(c)) {
    throw std::invalid_argument("non-finite value at index " +
                                std::to_string(i));
  }
}

}  // namespace

SparseVector SparseVector::basis(Index i, Complex c) {
  check_entry_finite(i, c);
  if (c == Complex{}) return SparseVector{};
  return SparseVector{{{i, c}}};
}

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  std::vector<Entry> merged;
  merged.reserve(entries.size());
  for (const Entry& e : entries) {
    check_entry_finite(e.first, e.second);
    if (!merged.empty() && merged.back().first == e.first) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.second == Complex{}; });
  for (const Entry& e : merged) check_entry_finite(e.first, e.second);
  return SparseVector{std::move(merged)};
}

SparseVector SparseVector::ones(Index lo, Index count) {
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    entries.emplace_back(lo + j, Complex{1.0, 0.0});
  }
  return SparseVector{std::move(entries)};
}

Index SparseVector::min_index() const {
  if (entries_.empty()) throw std::out_of_range("min_index of empty vector");
  return entries_.front().first;
}

Index SparseVector::max_index() const {
  if (entries_.empty()) throw std::out_of_range("max_index of empty vector");
  return entries_.back().first;
}

Complex SparseVector::at(Index i) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), i,
      [](const Entry& e, Index idx) { return e.first < idx; });
  if (it != entries_.end() && it->first == i) return it->second;
  return Complex{};
}

double SparseVector::norm_sq() const {
  double s = 0.0;
  for (const Entry& e : entries_) s += std::norm(e.second);
  return s;
}

double SparseVector::norm() const { return std::sqrt(norm_sq()); }

SparseVector SparseVector::scaled(Complex a) const {
  if (!is_finite(a)) throw std::invalid_argument("non-finite scalar");
  if (a == Complex{}) return SparseVector{};
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) {
    Complex v = a * e.second;
    check_entry_finite(e.first, v);
    if (v != Complex{}) out.emplace_back(e.first, v);
  }
  return SparseVector{std::move(out)};
}

SparseVector SparseVector::pruned(double threshold) const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (std::abs(e.second) > threshold) out.push_back(e);
  }
  return SparseVector{std::move(out)};
}

SparseVector operator+(const SparseVector& a, const SparseVector& b) {
  std::vector<SparseVector::Entry> out;
  out.reserve(a.entries_.size() + b.entries_.size());
  auto ia = a.entries_.begin(), ib = b.entries_.begin();
  while (ia != a.entries_.end() || ib != b.entries_.end()) {
    if (ib == b.entries_.end() ||
        (ia != a.entries_.end() && ia->first < ib->first)) {
      out.push_back(*ia++);
    } else if (ia == a.entries_.end() || ib->first < ia->first) {
      out.push_back(*ib++);
    } else {
      Complex v = ia->second + ib->second;
      if (v != Complex{}) out.emplace_back(ia->first, v);
      ++ia;
      ++ib;
    }
  }
  return SparseVector{std::move(out)};
}

SparseVector operator-(const SparseVector& a, const SparseVector& b) {
  return a + b.scaled(Complex{-1.0, 0.0});
}

SparseVector operator*(Complex a, const SparseVector& v) { return v.scaled(a); }

double vec_norm(const SparseVector& v) { return v.norm(); }

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("matrix dimensions must be positive");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Complex{1.0, 0.0};
  return m;
}

DenseMatrix DenseMatrix::from_rows(
    const std::vector<std::vector<Complex>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("matrix dimensions must be positive");
  }
  DenseMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) {
      throw std::invalid_argument("ragged matrix rows");
    }
    for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
  }
  m.check_finite("from_rows");
  return m;
}

std::vector<Complex> DenseMatrix::apply(std::span<const Complex> x) const {
  if (x.size() != cols_) throw std::invalid_argument("size mismatch in apply");
  std::vector<Complex> y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    Complex s{};
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

std::vector<Complex> DenseMatrix::apply_adjoint(
    std::span<const Complex> x) const {
  if (x.size() != rows_) {
    throw std::invalid_argument("size mismatch in apply_adjoint");
  }
  std::vector<Complex> y(cols_);
  for (std::size_t c = 0; c < cols_; ++c) {
    Complex s{};
    for (std::size_t r = 0; r < rows_; ++r) {
      s += std::conj((*this)(r, c)) * x[r];
    }
    y[c] = s;
  }
  return y;
}

bool DenseMatrix::is_upper_triangular() const {
  if (!square()) return false;
  for (std::size_t r = 1; r < rows_; ++r) {
    for (std::size_t c = 0; c < r; ++c) {
      if ((*this)(r, c) != Complex{}) return false;
    }
  }
  return true;
}

bool DenseMatrix::is_lower_triangular() const {
  if (!square()) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = r + 1; c < cols_; ++c) {
      if ((*this)(r, c) != Complex{}) return false;
    }
  }
  return true;
}

double DenseMatrix::max_abs_diagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
    m = std::max(m, std::abs((*this)(i, i)));
  }
  return m;
}

void DenseMatrix::check_finite(const std::string& context) const {
  for (const Complex& c : data_) {
    if (!is_finite(c)) {
      throw std::invalid_argument("non-finite matrix entry in " + context);
    }
  }
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols_ != b.rows_) {
    throw std::invalid_argument("size mismatch in matrix product");
  }
  DenseMatrix out(a.rows_, b.cols_);
  for (std::size_t r = 0; r < a.rows_; ++r) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      Complex av = a(r, k);
      if (av == Complex{}) continue;
      for (std::size_t c = 0; c < b.cols_; ++c) out(r, c) += av * b(k, c);
    }
  }
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw std::invalid_argument("size mismatch in matrix sum");
  }
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw std::invalid_argument("size mismatch in matrix difference");
  }
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
  return out;
}

DenseMatrix mat_pow(const DenseMatrix& a, unsigned long long m) {
  if (!a.square()) throw std::invalid_argument("mat_pow of non-square matrix");
  DenseMatrix result = DenseMatrix::identity(a.rows());
  DenseMatrix base = a;
  while (m > 0) {
    if (m & 1ull) result = result * base;
    m >>= 1ull;
    if (m > 0) base = base * base;
  }
  return result;
}

namespace {

// Deterministic non-degenerate start vector for power iteration.
void fill_start_vector(std::span<double> v) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (std::size_t i = 0; i < v.size(); ++i) {
    h ^= (i + 1) * 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    v[i] = 1.0 + 0.25 * static_cast<double>(h % 1024) / 1024.0;
  }
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double singular_value_estimate(std::size_t in_dim, std::size_t out_dim,
                               const RealMap& apply,
                               const RealMap& apply_adjoint, double tol,
                               int max_iter) {
  if (in_dim == 0 || out_dim == 0) return 0.0;
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  std::vector<double> v(in_dim), w(out_dim), u(in_dim);
  fill_start_vector(v);
  double vn = norm2(v);
  for (double& x : v) x /= vn;

  double rho = 0.0;
  double prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    apply(v, w);
    rho = 0.0;
    for (double x : w) rho += x * x;  // Rayleigh quotient of A*A at unit v
    if (rho == 0.0) return 0.0;
    if (prev >= 0.0 && std::abs(rho - prev) < tol * rho) break;
    prev = rho;
    apply_adjoint(w, u);
    double un = norm2(u);
    if (un == 0.0) break;
    for (std::size_t i = 0; i < in_dim; ++i) v[i] = u[i] / un;
  }
  return std::sqrt(rho);
}

OpNormEstimate op_norm_estimate(const DenseMatrix& a, double tol,
                                int max_iter) {
  double max_row = 0.0, max_col = 0.0;
  std::vector<double> col_sums(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double m = std::abs(a(r, c));
      row += m;
      col_sums[c] += m;
    }
    max_row = std::max(max_row, row);
  }
  for (double s : col_sums) max_col = std::max(max_col, s);
  OpNormEstimate out;
  out.upper_bound = std::sqrt(max_row * max_col);
  if (out.upper_bound == 0.0) return out;  // zero matrix

  const std::size_t n = a.cols(), m = a.rows();
  std::vector<Complex> zx(n), zy(m);
  auto pack = [](std::span<const double> x, std::vector<Complex>& z) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = Complex{x[2 * i], x[2 * i + 1]};
    }
  };
  auto unpack = [](const std::vector<Complex>& z, std::span<double> x) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      x[2 * i] = z[i].real();
      x[2 * i + 1] = z[i].imag();
    }
  };
  auto fwd = [&](std::span<const double> x, std::span<double> y) {
    pack(x, zx);
    unpack(a.apply(zx), y);
  };
  auto adj = [&](std::span<const double> x, std::span<double> y) {
    pack(x, zy);
    unpack(a.apply_adjoint(zy), y);
  };
  out.estimate = singular_value_estimate(2 * n, 2 * m, fwd, adj, tol, max_iter);
  return out;
}

DenseMatrix inverse(const DenseMatrix& a) {
  if (!a.square()) throw std::invalid_argument("inverse of non-square matrix");
  const std::size_t n = a.rows();
  DenseMatrix work = a;
  DenseMatrix inv = DenseMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(work(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      double m = std::abs(work(r, col));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (best == 0.0) throw std::invalid_argument("singular matrix");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(work(pivot, c), work(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    Complex d = work(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) /= d;
      inv(col, c) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      Complex f = work(r, col);
      if (f == Complex{}) continue;
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= f * work(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  inv.check_finite("inverse");
  return inv;
}

double nth_root(double x, long long n) {
  if (n <= 0) throw std::invalid_argument("nth_root order must be positive");
  if (x < 0.0) throw std::invalid_argument("nth_root of negative value");
  if (x == 0.0) return 0.0;
  if (n == 1) return x;
  int e = 0;
  double mant = std::frexp(x, &e);
  if (mant == 0.5) {  // x == 2^(e-1) exactly
    return std::exp2(static_cast<double>(e - 1) / static_cast<double>(n));
  }
  return std::exp2(std::log2(x) / static_cast<double>(n));
}

double binomial(long long n, long long k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (long long j = 1; j <= k; ++j) {
    r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
  }
  return r;
}

Complex pow_int(Complex z, unsigned long long e) {
  Complex result{1.0, 0.0};
  Complex base = z;
  while (e > 0) {
    if (e & 1ull) result *= base;
    e >>= 1ull;
    if (e > 0) base *= base;
  }
  return result;
}

}  // namespace opdyn::numlin
