#pragma once

#include <string>
#include <vector>

#include "opdyn/numlin.hpp"
#include "opdyn/operators.hpp"

namespace opdyn::dynamics {

using numlin::SparseVector;

/// Orbit distances d_i = ||T^i (x - y)|| for i = 0..N.
struct DistanceSeries {
  std::vector<double> values;
  std::string source;
};

/// Rejects x == y (degenerate pair).
DistanceSeries distance_series(const operators::OperatorDescription& op,
                               const SparseVector& x, const SparseVector& y,
                               long long steps);

/// F^n(tau) = (1/n) #{0 <= i <= n-1 : d_i < tau}; strict inequality, ties at
/// tau do not count. n must not exceed the series length.
double dist_fn(const DistanceSeries& series, long long n, double tau);

struct DistributionProfile {
  std::vector<double> tau_grid;
  std::vector<long long> n_schedule;
  // F_values[k][t] = F^{n_schedule[k]}(tau_grid[t]).
  std::vector<std::vector<double>> F_values;
  // Windowed min/max of F^n over the last half of the schedule, per tau.
  std::vector<double> F_lower_est;
  std::vector<double> F_upper_est;
  // Min distance over the last half of the series; finite stand-in for the
  // "0 in omega(z)" predicate.
  double liminf_orbit_norm_est = 0.0;
  std::string window_label;
};

DistributionProfile distribution_profile(const DistanceSeries& series,
                                         const std::vector<double>& tau_grid,
                                         const std::vector<long long>& n_schedule);

/// Geometric grid 1e-4..1e2, 13 points.
std::vector<double> default_tau_grid();
/// Geometric schedule from 8 up to N (deduplicated, increasing).
std::vector<long long> default_n_schedule(long long n_max);

struct LiYorkeEvidence {
  bool pass = false;
  double sup_tail = 0.0;
  double inf_tail = 0.0;
};

/// pass iff the tail-half max is >= delta and the tail-half min is <= eta.
/// Requires delta > eta > 0.
LiYorkeEvidence li_yorke_evidence(const DistanceSeries& series, double delta,
                                  double eta);

}  // namespace opdyn::dynamics
