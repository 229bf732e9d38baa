#include "opdyn/operators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace opdyn::operators {

namespace {

[[noreturn]] void out_of_range_index(Index i) {
  throw std::out_of_range("vector support outside operator index range: index " +
                          std::to_string(i));
}

}  // namespace

double weight_at(const WeightRule& rule, Index n) {
  return std::visit(
      [n](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PaperExample1Rule>) {
          if (n >= 0) return 2.0;
          double a = static_cast<double>(-n);
          return (a - 1.0) / a;
        } else if constexpr (std::is_same_v<T, PaperExample2Rule>) {
          if (n >= 0) {
            return static_cast<double>(n + 2) / static_cast<double>(n + 1);
          }
          double a = static_cast<double>(-n);
          return (a - 1.0) / a;
        } else if constexpr (std::is_same_v<T, ConstantWeight>) {
          return r.value;
        } else {
          auto it = r.entries.find(n);
          return it == r.entries.end() ? r.default_value : it->second;
        }
      },
      rule);
}

Complex diagonal_at(const DiagonalRule& rule, Index j) {
  return std::visit(
      [j](const auto& r) -> Complex {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantDiagonal>) {
          return r.value;
        } else if constexpr (std::is_same_v<T, AffineDiagonal>) {
          return r.a + r.b * static_cast<double>(j);
        } else {
          auto it = r.entries.find(j);
          return it == r.entries.end() ? r.default_value : it->second;
        }
      },
      rule);
}

Index block_size(const Block& b) {
  return std::visit(
      [](const auto& blk) -> Index {
        using T = std::decay_t<decltype(blk)>;
        if constexpr (std::is_same_v<T, DenseMatrix>) {
          return static_cast<Index>(blk.rows());
        } else {
          return blk.size;
        }
      },
      b);
}

DenseMatrix block_to_dense(const Block& b) {
  if (const auto* dense = std::get_if<DenseMatrix>(&b)) return *dense;
  const auto& u = std::get<UniformBidiagonal>(b);
  DenseMatrix m(static_cast<std::size_t>(u.size),
                static_cast<std::size_t>(u.size));
  for (Index j = 0; j < u.size; ++j) {
    m(static_cast<std::size_t>(j), static_cast<std::size_t>(j)) =
        Complex{u.diag, 0.0};
    if (j + 1 < u.size) {
      std::size_t r = static_cast<std::size_t>(u.lower ? j + 1 : j);
      std::size_t c = static_cast<std::size_t>(u.lower ? j : j + 1);
      m(r, c) = Complex{u.super, 0.0};
    }
  }
  return m;
}

numlin::OpNormEstimate block_norm_estimate(const UniformBidiagonal& b,
                                           double tol, int max_iter) {
  numlin::OpNormEstimate out;
  if (b.size == 1) {
    out.estimate = out.upper_bound = std::abs(b.diag);
    return out;
  }
  double row = std::abs(b.diag) + std::abs(b.super);
  out.upper_bound = row;
  if (row == 0.0) return out;

  const std::size_t n = static_cast<std::size_t>(b.size);
  const double d = b.diag, s = b.super;
  // Real coefficients, so the iteration can stay in real arithmetic. The
  // adjoint of the upper variant is the lower one with the same weights.
  auto upper = [n, d, s](std::span<const double> x, std::span<double> y) {
    for (std::size_t j = 0; j + 1 < n; ++j) y[j] = d * x[j] + s * x[j + 1];
    y[n - 1] = d * x[n - 1];
  };
  auto lower = [n, d, s](std::span<const double> x, std::span<double> y) {
    y[0] = d * x[0];
    for (std::size_t j = 1; j < n; ++j) y[j] = d * x[j] + s * x[j - 1];
  };
  if (b.lower) {
    out.estimate = numlin::singular_value_estimate(n, n, lower, upper, tol,
                                                   max_iter);
  } else {
    out.estimate = numlin::singular_value_estimate(n, n, upper, lower, tol,
                                                   max_iter);
  }
  return out;
}

BlockGenerator::BlockGenerator(std::function<Block(int)> gen,
                               Index first_offset, std::vector<Index> sizes)
    : gen_(std::move(gen)), sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw std::invalid_argument("block sequence is empty");
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(first_offset);
  for (Index s : sizes_) {
    if (s <= 0) throw std::invalid_argument("block sizes must be positive");
    offsets_.push_back(offsets_.back() + s);
  }
  memo_.resize(sizes_.size());
}

const Block& BlockGenerator::block(int k) const {
  if (k < 0 || k >= count()) throw std::out_of_range("block index");
  std::scoped_lock lock(mutex_);
  auto& slot = memo_[static_cast<std::size_t>(k)];
  if (!slot) {
    Block b = gen_(k);
    if (block_size(b) != size(k)) {
      throw std::logic_error("generated block size disagrees with offsets");
    }
    slot = std::move(b);
  }
  return *slot;
}

std::optional<int> BlockGenerator::block_of(Index i) const {
  if (i < offsets_.front() || i >= offsets_.back()) return std::nullopt;
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

namespace {

using Entry = SparseVector::Entry;

void append_dense_block_image(const DenseMatrix& m, Index offset,
                              std::span<const Entry> local,
                              std::vector<Entry>& out) {
  std::size_t n = m.rows();
  std::vector<Complex> x(n);
  for (const Entry& e : local) {
    x[static_cast<std::size_t>(e.first - offset)] = e.second;
  }
  std::vector<Complex> y = m.apply(x);
  for (std::size_t j = 0; j < n; ++j) {
    if (y[j] != Complex{}) out.emplace_back(offset + static_cast<Index>(j), y[j]);
  }
}

void append_bidiagonal_image(const UniformBidiagonal& u, Index offset,
                             std::span<const Entry> local,
                             std::vector<Entry>& out) {
  for (const Entry& e : local) {
    Index j = e.first - offset;
    Complex dc = u.diag * e.second;
    if (dc != Complex{}) out.emplace_back(e.first, dc);
    Complex sc = u.super * e.second;
    if (sc != Complex{}) {
      if (u.lower) {
        if (j + 1 < u.size) out.emplace_back(e.first + 1, sc);
      } else {
        if (j >= 1) out.emplace_back(e.first - 1, sc);
      }
    }
  }
}

}  // namespace

SparseVector apply(const OperatorDescription& op, const SparseVector& v) {
  std::vector<Entry> out;
  out.reserve(2 * v.support_size());

  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, BilateralShift>) {
          for (const Entry& e : v.entries()) {
            double w = weight_at(o.weights, e.first);
            Complex c = w * e.second;
            if (c != Complex{}) out.emplace_back(e.first + 1, c);
          }
        } else if constexpr (std::is_same_v<T, UnilateralShift>) {
          for (const Entry& e : v.entries()) {
            if (e.first < 0) out_of_range_index(e.first);
            double w = weight_at(o.weights, e.first);
            Complex c = w * e.second;
            if (c == Complex{}) continue;
            if (o.direction == ShiftDirection::forward) {
              out.emplace_back(e.first + 1, c);
            } else if (e.first >= 1) {
              out.emplace_back(e.first - 1, c);
            }
          }
        } else if constexpr (std::is_same_v<T, Diagonal>) {
          for (const Entry& e : v.entries()) {
            Complex c = diagonal_at(o.rule, e.first) * e.second;
            if (c != Complex{}) out.emplace_back(e.first, c);
          }
        } else if constexpr (std::is_same_v<T, Finite>) {
          Index n = static_cast<Index>(o.matrix.rows());
          for (const Entry& e : v.entries()) {
            if (e.first < 0 || e.first >= n) out_of_range_index(e.first);
          }
          if (!v.empty()) {
            append_dense_block_image(o.matrix, 0, v.entries(), out);
          }
        } else if constexpr (std::is_same_v<T, Jordan>) {
          for (const Entry& e : v.entries()) {
            if (e.first < 0 || e.first >= o.n) out_of_range_index(e.first);
            Complex dc = o.mu * e.second;
            if (dc != Complex{}) out.emplace_back(e.first, dc);
            if (e.first >= 1) out.emplace_back(e.first - 1, e.second);
          }
        } else {  // BlockDiagonal
          const BlockGenerator& gen = *o.blocks;
          const auto& entries = v.entries();
          std::size_t pos = 0;
          while (pos < entries.size()) {
            auto blk_idx = gen.block_of(entries[pos].first);
            if (!blk_idx) out_of_range_index(entries[pos].first);
            Index end = gen.offset(*blk_idx) + gen.size(*blk_idx);
            std::size_t run_end = pos;
            while (run_end < entries.size() && entries[run_end].first < end) {
              ++run_end;
            }
            std::span<const Entry> local(entries.data() + pos, run_end - pos);
            const Block& b = gen.block(*blk_idx);
            if (const auto* u = std::get_if<UniformBidiagonal>(&b)) {
              append_bidiagonal_image(*u, gen.offset(*blk_idx), local, out);
            } else {
              append_dense_block_image(std::get<DenseMatrix>(b),
                                       gen.offset(*blk_idx), local, out);
            }
            pos = run_end;
          }
        }
      },
      op);

  return SparseVector::from_entries(std::move(out));
}

std::vector<double> orbit_norms(const OperatorDescription& op,
                                const SparseVector& v, long long steps) {
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(steps) + 1);
  SparseVector x = v;
  norms.push_back(x.norm());
  for (long long i = 0; i < steps; ++i) {
    x = operators::apply(op, x);
    norms.push_back(x.norm());
  }
  return norms;
}

SparseVector apply_basis(const OperatorDescription& op, Index n, bool strict) {
  try {
    return operators::apply(op, SparseVector::basis(n));
  } catch (const std::out_of_range&) {
    if (strict) throw;
    return SparseVector{};
  }
}

DenseMatrix truncate(const OperatorDescription& op, Index lo, Index hi) {
  if (lo > hi) throw std::invalid_argument("truncate requires lo <= hi");
  std::size_t dim = static_cast<std::size_t>(hi - lo + 1);
  DenseMatrix m(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    SparseVector col = apply_basis(op, lo + static_cast<Index>(c), false);
    for (const auto& [i, val] : col.entries()) {
      if (i >= lo && i <= hi) m(static_cast<std::size_t>(i - lo), c) = val;
    }
  }
  return m;
}

}  // namespace opdyn::operators
