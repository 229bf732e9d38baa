#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "opdyn/numlin.hpp"
#include "opdyn/operators.hpp"

namespace opdyn::constructions {

using numlin::Complex;
using numlin::DenseMatrix;
using numlin::Index;
using numlin::SparseVector;

using WitnessSet = std::map<long long, SparseVector>;

// ---------------------------------------------------------------------------
// Nest block operator.

struct NestOperator {
  operators::OperatorDescription op;
  WitnessSet witnesses;  // keyed by m = 1..block_count
  int block_count = 0;
  bool transposed = false;
};

/// Block-diagonal operator whose k-th block (k = 1, 2, ...) is the
/// (k+1)x(k+1) matrix with 2 on the superdiagonal, at offsets a_1 = 1,
/// a_{k+1} = a_k + (k+1). Witness x_m is the last basis vector of block m;
/// with transposed=true the blocks carry the 2s on the subdiagonal and the
/// witness is the first basis vector of each block.
NestOperator nest_block_operator(int block_count = 64, bool transposed = false);

// ---------------------------------------------------------------------------
// I + K_epsilon.

struct IkBlockParams {
  int i = 0;        // 1-based block index
  double eps = 0.0; // epsilon * 4^-i
  long long L = 0;  // least L with (1+eps)^L >= sqrt(2)*C
  long long m = 0;  // least m with L/m < 1/i
  long long n = 0;  // 2*m
  double C = 0.0;
  Index offset = 0;
};

struct IkEpsilonParams {
  double epsilon = 0.0;
  std::string c_rule_name;
  std::vector<IkBlockParams> blocks;
};

struct IkEpsilonOperator {
  operators::OperatorDescription op;  // direct sum of (1-eps_i) I + S_i
  WitnessSet witnesses;               // all-ones per block, keyed by i
  IkEpsilonParams params;
  // Companion compact part per block: K_i = -eps_i I + S_i.
  std::vector<operators::UniformBidiagonal> compact_blocks;
};

/// Materializes the first block_count blocks of I + K_epsilon. C must be
/// positive and strictly increasing on 1..block_count; epsilon > 0.
IkEpsilonOperator build_ik_epsilon(double epsilon,
                                   const std::function<double(int)>& C,
                                   int block_count,
                                   std::string c_rule_name = "custom");

/// I + K_epsilon with the first `zeroed_blocks` blocks replaced by identity
/// blocks; zeroed_blocks = 0 reproduces the original operator blockwise.
operators::OperatorDescription ik_epsilon_truncated_perturbation(
    const IkEpsilonParams& params, int zeroed_blocks);

// ---------------------------------------------------------------------------
// Jordan powers.

/// J_n(mu)^m in closed form: entry (j, k) for k >= j is
/// binomial(m, k-j) * mu^(m-(k-j)), zero below the diagonal.
DenseMatrix jordan_power_closed_form(Complex mu, Index n, long long m);

// ---------------------------------------------------------------------------
// Orbit norms of the all-ones vector on a uniform bidiagonal block.

/// Default trim threshold for the windowed stencil: coordinates whose value
/// is within 2^-80 (relative) of the untouched bulk value are folded back
/// into it. The induced error is bounded by steps * 2^-80 relative, far
/// below double rounding; 0 disables trimming (full sweep).
inline constexpr double kDefaultOrbitTrim = 0x1p-80;

/// [ ||x||, ||Bx||, ..., ||B^steps x|| ] for x = all-ones on the block.
/// Iterates the two-term recurrence coordinate by coordinate, but only over
/// the window where values differ from the closed bulk value (d+s)^step;
/// see kDefaultOrbitTrim. Norms sum in ascending coordinate order.
std::vector<double> ones_orbit_norms(const operators::UniformBidiagonal& block,
                                     long long steps,
                                     double trim_threshold = kDefaultOrbitTrim);

}  // namespace opdyn::constructions
