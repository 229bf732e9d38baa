#include "opdyn/constructions.hpp"

#include <cmath>
#include <deque>
#include <memory>
#include <stdexcept>

namespace opdyn::constructions {

using operators::Block;
using operators::BlockDiagonal;
using operators::BlockGenerator;
using operators::UniformBidiagonal;

NestOperator nest_block_operator(int block_count, bool transposed) {
  if (block_count <= 0) {
    throw std::invalid_argument("block_count must be positive");
  }
  std::vector<Index> sizes;
  sizes.reserve(static_cast<std::size_t>(block_count));
  for (int k = 1; k <= block_count; ++k) sizes.push_back(k + 1);

  auto gen = [transposed](int k0) -> Block {
    return UniformBidiagonal{0.0, 2.0, static_cast<Index>(k0) + 2, transposed};
  };
  auto blocks = std::make_shared<BlockGenerator>(gen, Index{1}, sizes);

  NestOperator out;
  out.block_count = block_count;
  out.transposed = transposed;
  for (int m = 1; m <= block_count; ++m) {
    Index off = blocks->offset(m - 1);
    Index last = off + blocks->size(m - 1) - 1;
    out.witnesses.emplace(m, SparseVector::basis(transposed ? off : last));
  }
  out.op = BlockDiagonal{std::move(blocks)};
  return out;
}

namespace {

// Least L with (1+eps)^L >= sqrt(2)*C, settled by comparing exponents in
// extended precision and then adjusting around the rounded estimate.
long long least_growth_exponent(double eps, double c) {
  long double target = logl(sqrtl(2.0L) * static_cast<long double>(c));
  long double step = log1pl(static_cast<long double>(eps));
  auto holds = [&](long long l) {
    return static_cast<long double>(l) * step >= target;
  };
  long long l = static_cast<long long>(
      ceill(target / step));
  if (l < 1) l = 1;
  while (!holds(l)) ++l;
  while (l > 1 && holds(l - 1)) --l;
  return l;
}

}  // namespace

IkEpsilonOperator build_ik_epsilon(double epsilon,
                                   const std::function<double(int)>& C,
                                   int block_count, std::string c_rule_name) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (block_count <= 0) {
    throw std::invalid_argument("block_count must be positive");
  }

  IkEpsilonOperator out;
  out.params.epsilon = epsilon;
  out.params.c_rule_name = std::move(c_rule_name);

  std::vector<Index> sizes;
  std::vector<double> eps_values;
  double prev_c = 0.0;
  Index offset = 0;
  for (int i = 1; i <= block_count; ++i) {
    double ci = C(i);
    if (!(ci > 0.0) || !std::isfinite(ci)) {
      throw std::invalid_argument("C must be positive");
    }
    if (i > 1 && !(ci > prev_c)) {
      throw std::invalid_argument("C must be strictly increasing");
    }
    prev_c = ci;

    IkBlockParams p;
    p.i = i;
    p.eps = std::ldexp(epsilon, -2 * i);  // exact scaling by 4^-i
    p.L = least_growth_exponent(p.eps, ci);
    p.m = static_cast<long long>(i) * p.L + 1;  // least m with L/m < 1/i
    p.n = 2 * p.m;
    p.C = ci;
    p.offset = offset;
    offset += static_cast<Index>(p.n);
    sizes.push_back(static_cast<Index>(p.n));
    eps_values.push_back(p.eps);
    out.params.blocks.push_back(p);

    out.compact_blocks.push_back(
        UniformBidiagonal{-p.eps, 2.0 * p.eps, static_cast<Index>(p.n), false});
  }

  auto gen = [eps_values, sizes](int k0) -> Block {
    double e = eps_values[static_cast<std::size_t>(k0)];
    return UniformBidiagonal{1.0 - e, 2.0 * e, sizes[static_cast<std::size_t>(k0)],
                             false};
  };
  auto blocks = std::make_shared<BlockGenerator>(gen, Index{0}, sizes);
  for (const IkBlockParams& p : out.params.blocks) {
    out.witnesses.emplace(p.i, SparseVector::ones(p.offset, p.n));
  }
  out.op = BlockDiagonal{std::move(blocks)};
  return out;
}

operators::OperatorDescription ik_epsilon_truncated_perturbation(
    const IkEpsilonParams& params, int zeroed_blocks) {
  int count = static_cast<int>(params.blocks.size());
  if (zeroed_blocks < 0 || zeroed_blocks > count) {
    throw std::invalid_argument(
        "zeroed_blocks exceeds the materialized block count");
  }
  std::vector<Index> sizes;
  std::vector<double> eps_values;
  for (const IkBlockParams& p : params.blocks) {
    sizes.push_back(static_cast<Index>(p.n));
    eps_values.push_back(p.eps);
  }
  auto gen = [eps_values, sizes, zeroed_blocks](int k0) -> Block {
    Index n = sizes[static_cast<std::size_t>(k0)];
    if (k0 < zeroed_blocks) return UniformBidiagonal{1.0, 0.0, n, false};
    double e = eps_values[static_cast<std::size_t>(k0)];
    return UniformBidiagonal{1.0 - e, 2.0 * e, n, false};
  };
  return BlockDiagonal{std::make_shared<BlockGenerator>(gen, Index{0}, sizes)};
}

DenseMatrix jordan_power_closed_form(Complex mu, Index n, long long m) {
  if (n <= 0) throw std::invalid_argument("Jordan size must be positive");
  if (m < 0) throw std::invalid_argument("power must be nonnegative");
  DenseMatrix out(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  // All entries depend only on the offset k - j.
  std::vector<Complex> band(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) {
    if (t > m) break;
    band[static_cast<std::size_t>(t)] =
        numlin::binomial(m, t) *
        numlin::pow_int(mu, static_cast<unsigned long long>(m - t));
  }
  for (Index j = 0; j < n; ++j) {
    for (Index k = j; k < n; ++k) {
      Index t = k - j;
      if (t > m) break;
      out(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) =
          band[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

std::vector<double> ones_orbit_norms(const UniformBidiagonal& block,
                                     long long steps, double trim_threshold) {
  if (block.size <= 0) throw std::invalid_argument("block size must be positive");
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  if (trim_threshold < 0.0) {
    throw std::invalid_argument("trim threshold must be nonnegative");
  }
  const double d = block.diag;
  const double s = block.super;
  const Index n = block.size;
  // The fold-back error bound needs nonnegative coefficients; otherwise run
  // the full sweep.
  if (d < 0.0 || s < 0.0) trim_threshold = 0.0;

  // By reflection symmetry the all-ones orbit norms of the lower variant
  // coincide with the upper one, so a single sweep direction suffices.
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(steps) + 1);
  norms.push_back(std::sqrt(static_cast<double>(n)));

  double bulk = 1.0;          // shared value of all untouched coordinates
  std::deque<double> window;  // coordinates [n - window.size(), n)
  Index free_count = n;       // coordinates [0, free_count) hold `bulk`

  for (long long step = 1; step <= steps; ++step) {
    const std::size_t len = window.size();
    if (free_count > 0) {
      double entering = d * bulk + s * (len > 0 ? window[0] : 0.0);
      for (std::size_t j = 0; j + 1 < len; ++j) {
        window[j] = d * window[j] + s * window[j + 1];
      }
      if (len > 0) window[len - 1] = d * window[len - 1];
      window.push_front(entering);
      --free_count;
      bulk = d * bulk + s * bulk;
      while (!window.empty() &&
             std::abs(window.front() - bulk) <= trim_threshold * std::abs(bulk)) {
        window.pop_front();
        ++free_count;
      }
    } else {
      for (std::size_t j = 0; j + 1 < len; ++j) {
        window[j] = d * window[j] + s * window[j + 1];
      }
      if (len > 0) window[len - 1] = d * window[len - 1];
    }

    double sq = static_cast<double>(free_count) * (bulk * bulk);
    for (double w : window) sq += w * w;
    norms.push_back(std::sqrt(sq));
  }
  return norms;
}

}  // namespace opdyn::constructions
