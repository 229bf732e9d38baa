#include "opdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opdyn::dynamics {

DistanceSeries distance_series(const operators::OperatorDescription& op,
                               const SparseVector& x, const SparseVector& y,
                               long long steps) {
  SparseVector z = x - y;
  if (z.empty()) {
    throw std::invalid_argument("degenerate pair: x equals y componentwise");
  }
  DistanceSeries out;
  out.values = operators::orbit_norms(op, z, steps);
  out.source = "distance series of x - y, " +
               std::to_string(z.support_size()) + " support points";
  return out;
}

double dist_fn(const DistanceSeries& series, long long n, double tau) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  if (static_cast<std::size_t>(n) > series.values.size()) {
    throw std::invalid_argument("n exceeds the series length");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  long long count = 0;
  for (long long i = 0; i < n; ++i) {
    if (series.values[static_cast<std::size_t>(i)] < tau) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(n);
}

DistributionProfile distribution_profile(
    const DistanceSeries& series, const std::vector<double>& tau_grid,
    const std::vector<long long>& n_schedule) {
  if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
  if (n_schedule.empty()) throw std::invalid_argument("empty n schedule");
  for (std::size_t i = 1; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > tau_grid[i - 1])) {
      throw std::invalid_argument("tau grid must be strictly increasing");
    }
  }
  if (!(tau_grid.front() > 0.0)) {
    throw std::invalid_argument("tau grid must be positive");
  }
  for (std::size_t i = 1; i < n_schedule.size(); ++i) {
    if (n_schedule[i] <= n_schedule[i - 1]) {
      throw std::invalid_argument("n schedule must be strictly increasing");
    }
  }

  DistributionProfile out;
  out.tau_grid = tau_grid;
  out.n_schedule = n_schedule;
  out.F_values.reserve(n_schedule.size());
  for (long long n : n_schedule) {
    std::vector<double> row;
    row.reserve(tau_grid.size());
    for (double tau : tau_grid) row.push_back(dist_fn(series, n, tau));
    out.F_values.push_back(std::move(row));
  }

  std::size_t tail_start = n_schedule.size() / 2;
  out.F_lower_est.assign(tau_grid.size(), 1.0);
  out.F_upper_est.assign(tau_grid.size(), 0.0);
  for (std::size_t k = tail_start; k < n_schedule.size(); ++k) {
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
      out.F_lower_est[t] = std::min(out.F_lower_est[t], out.F_values[k][t]);
      out.F_upper_est[t] = std::max(out.F_upper_est[t], out.F_values[k][t]);
    }
  }

  std::size_t series_tail = series.values.size() / 2;
  double liminf = series.values[series_tail];
  for (std::size_t i = series_tail; i < series.values.size(); ++i) {
    liminf = std::min(liminf, series.values[i]);
  }
  out.liminf_orbit_norm_est = liminf;
  out.window_label =
      "windowed estimates over the last half of the n-schedule; finite tau "
      "grid undersamples 'for all tau > 0'";
  return out;
}

std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  grid.reserve(13);
  for (int k = 0; k < 13; ++k) {
    grid.push_back(1e-4 * std::pow(10.0, 0.5 * k));
  }
  return grid;
}

std::vector<long long> default_n_schedule(long long n_max) {
  if (n_max <= 0) throw std::invalid_argument("schedule end must be positive");
  std::vector<long long> sched;
  if (n_max <= 8) {
    sched.push_back(n_max);
    return sched;
  }
  const int points = 13;
  double lo = 8.0;
  for (int k = 0; k < points; ++k) {
    double v = lo * std::pow(static_cast<double>(n_max) / lo,
                             static_cast<double>(k) / (points - 1));
    long long n = std::llround(v);
    if (sched.empty() || n > sched.back()) sched.push_back(n);
  }
  if (sched.back() != n_max) sched.push_back(n_max);
  return sched;
}

LiYorkeEvidence li_yorke_evidence(const DistanceSeries& series, double delta,
                                  double eta) {
  if (!(delta > eta) || !(eta > 0.0)) {
    throw std::invalid_argument("requires delta > eta > 0");
  }
  if (series.values.empty()) throw std::invalid_argument("empty series");
  std::size_t tail_start = series.values.size() / 2;
  LiYorkeEvidence out;
  out.sup_tail = series.values[tail_start];
  out.inf_tail = series.values[tail_start];
  for (std::size_t i = tail_start; i < series.values.size(); ++i) {
    out.sup_tail = std::max(out.sup_tail, series.values[i]);
    out.inf_tail = std::min(out.inf_tail, series.values[i]);
  }
  out.pass = out.sup_tail >= delta && out.inf_tail <= eta;
  return out;
}

}  // namespace opdyn::dynamics
