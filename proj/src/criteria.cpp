#include "opdyn/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opdyn::criteria {

namespace {

constexpr double kGrowthSlack = 1e-9;      // relative, on the required side
constexpr double kSimilaritySlack = 1e-8;  // relative, similarity transfer
constexpr long long kDecayDwell = 100;     // steps the orbit must stay below

using operators::Block;
using operators::BlockDiagonal;
using operators::OperatorDescription;
using operators::UniformBidiagonal;

std::optional<double> triangular_block_radius(const Block& b) {
  if (const auto* u = std::get_if<UniformBidiagonal>(&b)) {
    return std::abs(u->diag);
  }
  const auto& dense = std::get<numlin::DenseMatrix>(b);
  if (dense.is_upper_triangular() || dense.is_lower_triangular()) {
    return dense.max_abs_diagonal();
  }
  return std::nullopt;
}

// Detects a witness that is a constant vector on the full range of a single
// uniform bidiagonal block; those orbits have a dedicated windowed stencil.
struct ConstantBlockWitness {
  UniformBidiagonal block;
  double scale = 0.0;  // |constant value|
};

std::optional<ConstantBlockWitness> constant_block_witness(
    const OperatorDescription& op, const SparseVector& x) {
  const auto* bd = std::get_if<BlockDiagonal>(&op);
  if (!bd || x.empty()) return std::nullopt;
  const operators::BlockGenerator& gen = *bd->blocks;
  auto lo = gen.block_of(x.min_index());
  auto hi = gen.block_of(x.max_index());
  if (!lo || !hi || *lo != *hi) return std::nullopt;
  if (static_cast<numlin::Index>(x.support_size()) != gen.size(*lo)) {
    return std::nullopt;
  }
  numlin::Complex c = x.entries().front().second;
  for (const auto& e : x.entries()) {
    if (e.second != c) return std::nullopt;
  }
  const Block& b = gen.block(*lo);
  if (const auto* u = std::get_if<UniformBidiagonal>(&b)) {
    return ConstantBlockWitness{*u, std::abs(c)};
  }
  return std::nullopt;
}

// Orbit norms ||T^k x|| for k = 0..steps, through the windowed stencil when
// the witness qualifies and by iterated sparse application otherwise.
std::vector<double> witness_orbit_norms(const OperatorDescription& op,
                                        const SparseVector& x,
                                        long long steps) {
  if (auto fast = constant_block_witness(op, x)) {
    std::vector<double> norms =
        constructions::ones_orbit_norms(fast->block, steps);
    for (double& v : norms) v *= fast->scale;
    return norms;
  }
  return operators::orbit_norms(op, x, steps);
}

struct DecayScan {
  DecayRecord record;
};

// Scans the orbit of z = T^start_offset x for decay below tol * ||x||
// sustained for kDecayDwell steps, with exact zeros short-circuiting.
// Reported steps are absolute (counted from x itself).
DecayRecord scan_decay_generic(const OperatorDescription& op,
                               const SparseVector& start, long long m,
                               long long start_offset, double norm0, double tol,
                               long long horizon) {
  DecayRecord rec;
  rec.m = m;
  SparseVector z = start;
  double threshold = tol * norm0;
  long long below_start = -1;
  double last_ratio = 1.0;
  for (long long k = start_offset + 1; k <= horizon + kDecayDwell; ++k) {
    z = operators::apply(op, z);
    if (z.empty()) {
      rec.mode = DecayMode::exact_zero;
      rec.step = k;
      rec.ratio = 0.0;
      rec.ok = true;
      return rec;
    }
    double nk = z.norm();
    last_ratio = nk / norm0;
    if (nk < threshold) {
      if (below_start < 0) below_start = k;
      if (below_start <= horizon && k - below_start >= kDecayDwell) {
        rec.mode = DecayMode::below_tol;
        rec.step = below_start;
        rec.ratio = last_ratio;
        rec.ok = true;
        return rec;
      }
    } else {
      below_start = -1;
    }
  }
  rec.mode = DecayMode::none;
  rec.step = horizon;
  rec.ratio = last_ratio;
  rec.ok = false;
  return rec;
}

// Same scan over a precomputed norm sequence (fast-path witnesses).
DecayRecord scan_decay_norms(const std::vector<double>& norms, long long m,
                             double norm0, double tol, long long horizon) {
  DecayRecord rec;
  rec.m = m;
  double threshold = tol * norm0;
  long long below_start = -1;
  double last_ratio = 1.0;
  long long limit = std::min<long long>(
      horizon + kDecayDwell, static_cast<long long>(norms.size()) - 1);
  for (long long k = 1; k <= limit; ++k) {
    double nk = norms[static_cast<std::size_t>(k)];
    last_ratio = nk / norm0;
    if (nk == 0.0) {
      rec.mode = DecayMode::exact_zero;
      rec.step = k;
      rec.ratio = 0.0;
      rec.ok = true;
      return rec;
    }
    if (nk < threshold) {
      if (below_start < 0) below_start = k;
      if (below_start <= horizon && k - below_start >= kDecayDwell) {
        rec.mode = DecayMode::below_tol;
        rec.step = below_start;
        rec.ratio = last_ratio;
        rec.ok = true;
        return rec;
      }
    } else {
      below_start = -1;
    }
  }
  rec.mode = DecayMode::none;
  rec.step = horizon;
  rec.ratio = last_ratio;
  rec.ok = false;
  return rec;
}

void finalize(CertificateReport& report) {
  report.pass = report.violations.empty();
  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const Violation& a, const Violation& b) {
                     return a.m != b.m ? a.m < b.m : a.i < b.i;
                   });
}

}  // namespace

std::string to_string(DecayMode mode) {
  switch (mode) {
    case DecayMode::exact_zero: return "exact_zero";
    case DecayMode::below_tol: return "below_tol";
    case DecayMode::spectral_certificate: return "spectral_certificate";
    case DecayMode::none: return "none";
  }
  return "none";
}

bool CertificateReport::witness_passed(long long m) const {
  for (const WitnessVerdict& w : witnesses) {
    if (w.m == m) return w.growth_ok && w.decay_ok;
  }
  return false;
}

CertificateReport verify_nu(const OperatorDescription& op,
                            const NUCertificate& cert) {
  if (!(cert.r > 1.0)) throw std::invalid_argument("requires r > 1");
  if (cert.witnesses.empty()) throw std::invalid_argument("no witnesses");
  if (!(cert.decay_tol > 0.0) || cert.decay_horizon <= 0) {
    throw std::invalid_argument("invalid decay parameters");
  }

  CertificateReport report;
  report.parameters = {{"r", cert.r},
                       {"decay_tol", cert.decay_tol},
                       {"decay_horizon", static_cast<double>(cert.decay_horizon)}};

  for (const auto& [m, x] : cert.witnesses) {
    if (x.empty()) throw std::invalid_argument("zero witness for m");
    double norm0 = x.norm();
    WitnessVerdict verdict;
    verdict.m = m;

    SparseVector z = x;
    long long applied = 0;
    double required = norm0;
    for (long long i = 1; i <= m; ++i) {
      z = operators::apply(op, z);
      ++applied;
      required *= cert.r;
      double achieved = z.norm();
      report.margins.push_back({m, i, required, achieved});
      if (achieved < required * (1.0 - kGrowthSlack)) {
        report.violations.push_back({m, i, required, achieved, "growth"});
        verdict.growth_ok = false;
        break;
      }
    }

    DecayRecord rec;
    if (z.empty()) {
      // Growth loop already reached the zero vector.
      rec.m = m;
      rec.mode = DecayMode::exact_zero;
      rec.step = applied;
      rec.ok = true;
    } else {
      rec = scan_decay_generic(op, z, m, applied, norm0, cert.decay_tol,
                               cert.decay_horizon);
    }
    verdict.decay_ok = rec.ok;
    if (!rec.ok) {
      report.violations.push_back(
          {m, rec.step, cert.decay_tol, rec.ratio, "decay"});
    }
    report.decay.push_back(rec);
    report.witnesses.push_back(verdict);
  }
  finalize(report);
  return report;
}

CertificateReport verify_wnu(const OperatorDescription& op,
                             const WNUCertificate& cert) {
  if (cert.C.empty()) throw std::invalid_argument("empty certificate");
  if (!(cert.decay_tol > 0.0) || cert.decay_horizon <= 0) {
    throw std::invalid_argument("invalid decay parameters");
  }
  double prev_c = 0.0;
  long long prev_n = 0;
  for (const auto& [m, c] : cert.C) {
    if (!(c > prev_c)) {
      throw std::invalid_argument("C must be positive and strictly increasing");
    }
    prev_c = c;
    auto it = cert.N.find(m);
    if (it == cert.N.end()) throw std::invalid_argument("missing N for m");
    if (it->second <= prev_n) {
      throw std::invalid_argument("N must be strictly increasing");
    }
    prev_n = it->second;
    if (!cert.target_fractions.contains(m)) {
      throw std::invalid_argument("missing target fraction for m");
    }
    if (!cert.witnesses.contains(m)) {
      throw std::invalid_argument("missing witness for claimed m = " +
                                  std::to_string(m));
    }
  }

  CertificateReport report;
  report.parameters = {{"decay_tol", cert.decay_tol},
                       {"decay_horizon", static_cast<double>(cert.decay_horizon)}};

  for (const auto& [m, c_m] : cert.C) {
    const SparseVector& x = cert.witnesses.at(m);
    if (x.empty()) throw std::invalid_argument("zero witness");
    long long n_m = cert.N.at(m);
    double target = cert.target_fractions.at(m);

    std::vector<double> norms = witness_orbit_norms(op, x, n_m - 1);
    double norm0 = norms[0];
    double threshold = c_m * norm0 * (1.0 - kGrowthSlack);
    long long count = 0;
    for (long long k = 0; k < n_m; ++k) {
      if (norms[static_cast<std::size_t>(k)] >= threshold) ++count;
    }
    double fraction = static_cast<double>(count) / static_cast<double>(n_m);

    WitnessVerdict verdict;
    verdict.m = m;
    verdict.fraction = fraction;
    verdict.fraction_target = target;
    report.margins.push_back({m, n_m, target, fraction});
    if (fraction < target * (1.0 - kGrowthSlack)) {
      report.violations.push_back({m, n_m, target, fraction, "fraction"});
      verdict.growth_ok = false;
    }

    DecayRecord rec;
    rec.m = m;
    auto radius = support_spectral_bound(op, x);
    if (radius && *radius < 1.0) {
      rec.mode = DecayMode::spectral_certificate;
      rec.radius = *radius;
      rec.ok = true;
    } else if (auto fast = constant_block_witness(op, x)) {
      std::vector<double> decay_norms = constructions::ones_orbit_norms(
          fast->block, cert.decay_horizon + kDecayDwell);
      for (double& v : decay_norms) v *= fast->scale;
      rec = scan_decay_norms(decay_norms, m, norm0, cert.decay_tol,
                             cert.decay_horizon);
    } else {
      rec = scan_decay_generic(op, x, m, 0, norm0, cert.decay_tol,
                               cert.decay_horizon);
    }
    verdict.decay_ok = rec.ok;
    if (!rec.ok) {
      report.violations.push_back(
          {m, rec.step, cert.decay_tol, rec.ratio, "decay"});
    }
    report.decay.push_back(rec);
    report.witnesses.push_back(verdict);
  }
  finalize(report);
  return report;
}

CertificateReport similarity_transfer_check(const DenseMatrix& T,
                                            const DenseMatrix& C,
                                            const SparseVector& x, double r,
                                            long long m) {
  if (!T.square() || !C.square() || T.rows() != C.rows()) {
    throw std::invalid_argument("T and C must be square of equal size");
  }
  if (!(r > 1.0)) throw std::invalid_argument("requires r > 1");
  if (m <= 0) throw std::invalid_argument("m must be positive");
  if (x.empty()) throw std::invalid_argument("zero witness");

  const std::size_t n = T.rows();
  std::vector<numlin::Complex> xd(n);
  for (const auto& [i, v] : x.entries()) {
    if (i < 0 || i >= static_cast<numlin::Index>(n)) {
      throw std::out_of_range("witness support outside matrix range: index " +
                              std::to_string(i));
    }
    xd[static_cast<std::size_t>(i)] = v;
  }

  DenseMatrix Cinv = inverse(C);  // throws on singular input
  auto est_c = numlin::op_norm_estimate(C);
  auto est_ci = numlin::op_norm_estimate(Cinv);
  if (est_c.upper_bound * est_ci.upper_bound > 1e8) {
    throw std::invalid_argument("ill-conditioned C (condition bound above 1e8)");
  }
  double kappa = est_c.estimate * est_ci.estimate;

  auto vnorm = [](const std::vector<numlin::Complex>& v) {
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
  };

  // Premise: x is a genuine r-growth witness for T through step m.
  {
    std::vector<numlin::Complex> z = xd;
    double norm0 = vnorm(z);
    double required = norm0;
    for (long long i = 1; i <= m; ++i) {
      z = T.apply(z);
      required *= r;
      if (vnorm(z) < required * (1.0 - kGrowthSlack)) {
        throw std::invalid_argument(
            "premise violated: x is not an r-growth witness for T at step " +
            std::to_string(i));
      }
    }
  }

  CertificateReport report;
  report.parameters = {{"r", r},
                       {"m", static_cast<double>(m)},
                       {"kappa_estimate", kappa},
                       {"kappa_upper_bound", est_c.upper_bound * est_ci.upper_bound}};

  DenseMatrix M = Cinv * (T * C);
  std::vector<numlin::Complex> y = Cinv.apply(xd);
  double y_norm0 = vnorm(y);
  double r_pow = 1.0;
  for (long long i = 1; i <= m; ++i) {
    y = M.apply(y);
    r_pow *= r;
    double required = r_pow / kappa * y_norm0;
    double achieved = vnorm(y);
    report.margins.push_back({0, i, required, achieved});
    if (achieved < required * (1.0 - kSimilaritySlack)) {
      report.violations.push_back({0, i, required, achieved, "similarity"});
    }
  }
  finalize(report);
  return report;
}

std::optional<double> support_spectral_bound(const OperatorDescription& op,
                                             const SparseVector& v) {
  using operators::Diagonal;
  using operators::Finite;
  using operators::Jordan;

  if (v.empty()) return 0.0;
  if (const auto* diag = std::get_if<Diagonal>(&op)) {
    double radius = 0.0;
    for (const auto& e : v.entries()) {
      radius = std::max(radius, std::abs(diagonal_at(diag->rule, e.first)));
    }
    return radius;
  }
  if (const auto* jordan = std::get_if<Jordan>(&op)) {
    return std::abs(jordan->mu);
  }
  if (const auto* finite = std::get_if<Finite>(&op)) {
    if (finite->matrix.is_upper_triangular() ||
        finite->matrix.is_lower_triangular()) {
      return finite->matrix.max_abs_diagonal();
    }
    return std::nullopt;
  }
  if (const auto* bd = std::get_if<BlockDiagonal>(&op)) {
    const operators::BlockGenerator& gen = *bd->blocks;
    double radius = 0.0;
    int last_block = -1;
    for (const auto& e : v.entries()) {
      auto b = gen.block_of(e.first);
      if (!b) return std::nullopt;
      if (*b == last_block) continue;
      last_block = *b;
      auto r = triangular_block_radius(gen.block(*b));
      if (!r) return std::nullopt;
      radius = std::max(radius, *r);
    }
    return radius;
  }
  return std::nullopt;  // shifts
}

SpectralGrowth spectral_growth(const OperatorDescription& op,
                               const SparseVector& probe, long long steps) {
  if (probe.empty()) throw std::invalid_argument("zero probe rejected");
  if (steps <= 0) throw std::invalid_argument("steps must be positive");

  SpectralGrowth out;
  std::vector<double> norms = operators::orbit_norms(op, probe, steps);
  out.rates.reserve(static_cast<std::size_t>(steps));
  for (long long k = 1; k <= steps; ++k) {
    out.rates.push_back(numlin::nth_root(norms[static_cast<std::size_t>(k)], k));
  }

  using operators::Diagonal;
  using operators::Finite;
  using operators::Jordan;
  if (const auto* diag = std::get_if<Diagonal>(&op)) {
    if (const auto* c = std::get_if<operators::ConstantDiagonal>(&diag->rule)) {
      out.triangular_exact = std::abs(c->value);
    } else if (const auto* a = std::get_if<operators::AffineDiagonal>(&diag->rule)) {
      if (a->b == numlin::Complex{}) out.triangular_exact = std::abs(a->a);
    } else if (const auto* t = std::get_if<operators::DiagonalTable>(&diag->rule)) {
      double radius = std::abs(t->default_value);
      for (const auto& [idx, val] : t->entries) {
        radius = std::max(radius, std::abs(val));
      }
      out.triangular_exact = radius;
    }
  } else if (const auto* jordan = std::get_if<Jordan>(&op)) {
    out.triangular_exact = std::abs(jordan->mu);
  } else if (const auto* finite = std::get_if<Finite>(&op)) {
    if (finite->matrix.is_upper_triangular() ||
        finite->matrix.is_lower_triangular()) {
      out.triangular_exact = finite->matrix.max_abs_diagonal();
    }
  } else if (const auto* bd = std::get_if<BlockDiagonal>(&op)) {
    const operators::BlockGenerator& gen = *bd->blocks;
    double radius = 0.0;
    bool all_triangular = true;
    for (int k = 0; k < gen.count(); ++k) {
      auto r = triangular_block_radius(gen.block(k));
      if (!r) {
        all_triangular = false;
        break;
      }
      radius = std::max(radius, *r);
    }
    if (all_triangular) {
      out.triangular_exact = radius;
      out.materialized_scope = true;
    }
  }
  return out;
}

std::vector<SparseVector> witness_candidates(const BlockDiagonal& op,
                                             int block_index) {
  const operators::BlockGenerator& gen = *op.blocks;
  if (block_index < 0 || block_index >= gen.count()) {
    throw std::out_of_range("block index");
  }
  numlin::Index off = gen.offset(block_index);
  numlin::Index size = gen.size(block_index);
  return {SparseVector::basis(off), SparseVector::basis(off + size - 1),
          SparseVector::ones(off, size)};
}

}  // namespace opdyn::criteria
