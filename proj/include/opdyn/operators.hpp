#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "opdyn/numlin.hpp"

namespace opdyn::operators {

using numlin::Complex;
using numlin::DenseMatrix;
using numlin::Index;
using numlin::SparseVector;

// ---------------------------------------------------------------------------
// Weight rules for shift operators.

struct PaperExample1Rule {};  // 2 for n >= 0, (|n|-1)/|n| for n < 0
struct PaperExample2Rule {};  // (n+2)/(n+1) for n >= 0, (|n|-1)/|n| for n < 0
struct ConstantWeight {
  double value = 1.0;
};
struct WeightTable {
  std::map<Index, double> entries;
  double default_value = 0.0;
};

using WeightRule = std::variant<PaperExample1Rule, PaperExample2Rule,
                                ConstantWeight, WeightTable>;

double weight_at(const WeightRule& rule, Index n);

// ---------------------------------------------------------------------------
// Diagonal rules.

struct ConstantDiagonal {
  Complex value;
};
struct AffineDiagonal {  // lambda_j = a + b*j
  Complex a;
  Complex b;
};
struct DiagonalTable {
  std::map<Index, Complex> entries;
  Complex default_value;
};

using DiagonalRule =
    std::variant<ConstantDiagonal, AffineDiagonal, DiagonalTable>;

Complex diagonal_at(const DiagonalRule& rule, Index j);

// ---------------------------------------------------------------------------
// Blocks of a block-diagonal operator.

/// Constant bidiagonal matrix: `diag` on the diagonal and `super` on the
/// superdiagonal (subdiagonal when `lower`). Covers every displayed block in
/// the constructions without materializing large matrices.
struct UniformBidiagonal {
  double diag = 0.0;
  double super = 0.0;
  Index size = 0;
  bool lower = false;
};

using Block = std::variant<DenseMatrix, UniformBidiagonal>;

Index block_size(const Block& b);
DenseMatrix block_to_dense(const Block& b);

/// Matrix-free op_norm_estimate for blocks too large to materialize densely.
/// Same contract as the dense overload; the bound is |diag| + |super|.
numlin::OpNormEstimate block_norm_estimate(const UniformBidiagonal& b,
                                           double tol = 1e-10,
                                           int max_iter = 1000);

/// Lazily materialized, memoized sequence of blocks. Block k (0-based) covers
/// coordinates [offset(k), offset(k) + size(k)). First materialization is
/// synchronized; reads after that are lock-free on the caller's side.
class BlockGenerator {
 public:
  BlockGenerator(std::function<Block(int)> gen, Index first_offset,
                 std::vector<Index> sizes);

  int count() const { return static_cast<int>(sizes_.size()); }
  Index offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }
  Index size(int k) const { return sizes_[static_cast<std::size_t>(k)]; }
  Index first_offset() const { return offsets_.front(); }
  Index end_offset() const { return offsets_.back(); }

  const Block& block(int k) const;

  /// Index of the block containing coordinate i, or nullopt when outside
  /// every materialized block.
  std::optional<int> block_of(Index i) const;

 private:
  std::function<Block(int)> gen_;
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;  // count()+1 entries; last is one past the end
  mutable std::vector<std::optional<Block>> memo_;
  mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Operator descriptions.

enum class ShiftDirection { forward, backward };

/// Bilateral weighted shift, convention T e_n = w_n e_{n+1}: the weight is
/// indexed by the source coordinate. Defined on all integer indices.
struct BilateralShift {
  WeightRule weights;
};

/// Unilateral shift on indices n >= 0. Forward: T e_n = w_n e_{n+1}.
/// Backward: T e_n = w_n e_{n-1} with T e_0 = 0.
struct UnilateralShift {
  WeightRule weights;
  ShiftDirection direction = ShiftDirection::forward;
};

struct Diagonal {
  DiagonalRule rule;
};

/// Finite square matrix acting on coordinates 0..n-1.
struct Finite {
  DenseMatrix matrix;
};

/// Jordan block J_n(mu) on coordinates 0..n-1: mu on the diagonal, 1 on the
/// superdiagonal, so J e_j = e_{j-1} + mu e_j.
struct Jordan {
  Complex mu;
  Index n = 1;
};

struct BlockDiagonal {
  std::shared_ptr<const BlockGenerator> blocks;
};

using OperatorDescription = std::variant<BilateralShift, UnilateralShift,
                                         Diagonal, Finite, Jordan, BlockDiagonal>;

/// Exact image of v under the operator. Support outside the operator's index
/// range is rejected with the offending index in the message.
SparseVector apply(const OperatorDescription& op, const SparseVector& v);

/// [ ||v||, ||Tv||, ..., ||T^N v|| ] by iterated application.
std::vector<double> orbit_norms(const OperatorDescription& op,
                                const SparseVector& v, long long steps);

/// Compression of the operator to coordinates lo..hi inclusive. Coordinates
/// outside the operator's natural range contribute zero columns.
DenseMatrix truncate(const OperatorDescription& op, Index lo, Index hi);

/// Single column of the operator: the image of e_n. With strict=true an
/// out-of-range n throws; otherwise it yields the zero vector.
SparseVector apply_basis(const OperatorDescription& op, Index n, bool strict);

}  // namespace opdyn::operators
