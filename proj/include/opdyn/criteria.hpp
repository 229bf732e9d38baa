#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/constructions.hpp"
#include "opdyn/numlin.hpp"
#include "opdyn/operators.hpp"

namespace opdyn::criteria {

using constructions::WitnessSet;
using numlin::DenseMatrix;
using numlin::SparseVector;

struct NUCertificate {
  double r = 2.0;  // norm-unimodal constant, must exceed 1
  WitnessSet witnesses;
  long long decay_horizon = 100000;
  double decay_tol = 1e-6;
};

struct WNUCertificate {
  std::map<long long, double> C;       // thresholds, strictly increasing in m
  std::map<long long, long long> N;    // window lengths, strictly increasing
  WitnessSet witnesses;
  std::map<long long, double> target_fractions;
  long long decay_horizon = 100000;
  double decay_tol = 1e-6;
};

enum class DecayMode {
  exact_zero,            // orbit hit the zero vector
  below_tol,             // fell below decay_tol * ||x|| and stayed for 100 steps
  spectral_certificate,  // witness support confined to triangular structure
                         // with every diagonal modulus < 1
  none                   // no decay established within the horizon
};

std::string to_string(DecayMode mode);

struct Margin {
  long long m = 0;  // witness label
  long long i = 0;  // step (or window length for fraction margins)
  double required = 0.0;
  double achieved = 0.0;
};

struct Violation {
  long long m = 0;
  long long i = 0;
  double required = 0.0;
  double achieved = 0.0;
  std::string what;  // "growth", "fraction", "decay", "similarity"
};

struct DecayRecord {
  long long m = 0;
  DecayMode mode = DecayMode::none;
  long long step = 0;     // first step meeting the criterion (0 for spectral)
  double ratio = 0.0;     // final ||T^k x|| / ||x|| observed (0 for spectral)
  double radius = 0.0;    // certified spectral bound when applicable
  bool ok = false;
};

struct WitnessVerdict {
  long long m = 0;
  bool growth_ok = true;    // per-step growth (NU) or fraction target (WNU)
  bool decay_ok = true;
  double fraction = 0.0;    // WNU only
  double fraction_target = 0.0;
};

struct CertificateReport {
  bool pass = false;
  std::vector<Violation> violations;  // ordered by (m, i); front is the first
  std::vector<Margin> margins;
  std::vector<DecayRecord> decay;
  std::vector<WitnessVerdict> witnesses;
  std::vector<std::pair<std::string, double>> parameters;
  std::string scope_note;  // e.g. "materialized blocks only"

  bool witness_passed(long long m) const;
};

/// Def-style check: ||T^i x_m|| >= r^i ||x_m|| for i = 1..m (relative slack
/// 1e-9 on the required side) plus orbit decay within the horizon, exact
/// zeros short-circuiting.
CertificateReport verify_nu(const operators::OperatorDescription& op,
                            const NUCertificate& cert);

/// Weak-criterion check: fraction of 0 <= i < N_m with
/// ||T^i x_m|| >= C_m ||x_m|| must reach the target per m, plus per-witness
/// decay (iterated, exact-zero, or certified by triangular spectral bound).
CertificateReport verify_wnu(const operators::OperatorDescription& op,
                             const WNUCertificate& cert);

/// Checks the similarity-transfer inequality
///   ||(C^-1 T C)^i C^-1 x|| >= (r^i / kappa) ||C^-1 x||,  i = 1..m,
/// with kappa = ||C|| ||C^-1|| from op_norm_estimate and relative slack 1e-8.
/// The premise ||T^i x|| >= r^i ||x|| is verified first; singular or
/// ill-conditioned C (bound above 1e8) is rejected.
CertificateReport similarity_transfer_check(const DenseMatrix& T,
                                            const DenseMatrix& C,
                                            const SparseVector& x, double r,
                                            long long m);

struct SpectralGrowth {
  std::vector<double> rates;  // ||T^n probe||^(1/n), n = 1..N; 0 on zero orbit
  std::optional<double> triangular_exact;
  bool materialized_scope = false;  // triangular_exact covers materialized
                                    // blocks only
};

SpectralGrowth spectral_growth(const operators::OperatorDescription& op,
                               const SparseVector& probe, long long steps);

/// Exact spectral-radius bound for the part of the operator the vector
/// touches, when the structure is triangular; nullopt otherwise.
std::optional<double> support_spectral_bound(
    const operators::OperatorDescription& op, const SparseVector& v);

/// Witness candidates for one block of a block-diagonal operator: first basis
/// vector, last basis vector, and the all-ones vector. Deliberately not a
/// general optimizer.
std::vector<SparseVector> witness_candidates(const operators::BlockDiagonal& op,
                                             int block_index);

}  // namespace opdyn::criteria
