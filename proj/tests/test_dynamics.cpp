#include <cmath>
#include <random>

#include <doctest.h>

#include "opdyn/constructions.hpp"
#include "opdyn/dynamics.hpp"

using namespace opdyn;
using namespace opdyn::dynamics;
using numlin::Complex;
using numlin::Index;
using numlin::SparseVector;
using operators::ConstantDiagonal;
using operators::Diagonal;
using operators::DiagonalTable;
using operators::OperatorDescription;

namespace {

DistanceSeries series_of(std::vector<double> values) {
  DistanceSeries s;
  s.values = std::move(values);
  s.source = "synthetic";
  return s;
}

// Brute-force counter, independent of dist_fn.
double brute_force_fraction(const std::vector<double>& d, long long n,
                            double tau) {
  long long hits = 0;
  for (long long i = n - 1; i >= 0; --i) {
    if (d[static_cast<std::size_t>(i)] < tau) ++hits;
  }
  return double(hits) / double(n);
}

}  // namespace

TEST_CASE("distance series of the nest witness pair (x_3, 0)") {
  auto nest = constructions::nest_block_operator(4);
  auto series =
      distance_series(nest.op, nest.witnesses.at(3), SparseVector{}, 5);
  CHECK(series.values == std::vector<double>{1.0, 2.0, 4.0, 8.0, 0.0, 0.0});
}

TEST_CASE("identity operator gives a constant distance series") {
  OperatorDescription op = Diagonal{ConstantDiagonal{Complex{1.0, 0.0}}};
  auto x = SparseVector::from_entries({{0, {1.0, 0.0}}, {2, {0.0, 1.0}}});
  auto y = SparseVector::basis(2, Complex{0.0, 0.5});
  auto series = distance_series(op, x, y, 4);
  double d0 = (x - y).norm();
  for (double v : series.values) CHECK(v == d0);
}

TEST_CASE("half-scaling diagonal halves the distances") {
  OperatorDescription op = Diagonal{ConstantDiagonal{Complex{0.5, 0.0}}};
  auto series = distance_series(op, SparseVector::basis(0), SparseVector{}, 3);
  CHECK(series.values == std::vector<double>{1.0, 0.5, 0.25, 0.125});
}

TEST_CASE("degenerate pairs are rejected") {
  OperatorDescription op = Diagonal{ConstantDiagonal{Complex{0.5, 0.0}}};
  auto x = SparseVector::basis(3, Complex{2.0, -1.0});
  CHECK_THROWS_AS(distance_series(op, x, x, 5), std::invalid_argument);
}

TEST_CASE("dist_fn on constant series") {
  auto s = series_of(std::vector<double>(10, 5.0));
  CHECK(dist_fn(s, 10, 1.0) == 0.0);
  CHECK(dist_fn(s, 10, 6.0) == 1.0);
  CHECK(dist_fn(s, 10, 5.0) == 0.0);  // strict inequality: ties do not count
}

TEST_CASE("dist_fn counts zeros in the truncated doubling series") {
  auto s = series_of({1, 2, 4, 8, 0, 0, 0, 0});
  CHECK(dist_fn(s, 8, 0.5) == 0.5);
}

TEST_CASE("dist_fn rejects n beyond the series") {
  auto s = series_of({1, 2, 3});
  CHECK_THROWS_AS(dist_fn(s, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dist_fn(s, 0, 1.0), std::invalid_argument);
}

TEST_CASE("dist_fn equals the brute-force counter on random series") {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t len = 1 + rng() % 64;
    std::vector<double> d(len);
    for (double& v : d) v = u(rng);
    auto s = series_of(d);
    long long n = 1 + static_cast<long long>(rng() % len);
    double tau = u(rng) + 1e-6;
    double got = dist_fn(s, n, tau);
    CHECK(got == brute_force_fraction(d, n, tau));
    // n * F^n recovers an integer count
    double scaled = got * double(n);
    CHECK(std::abs(scaled - std::floor(scaled + 0.5)) < 1e-9);
  }
}

TEST_CASE("dist_fn is nondecreasing in tau") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> d(50);
  for (double& v : d) v = u(rng);
  auto s = series_of(d);
  for (long long n : {1LL, 7LL, 50LL}) {
    double prev = 0.0;
    for (double tau = 0.1; tau < 5.0; tau += 0.1) {
      double f = dist_fn(s, n, tau);
      CHECK(f >= prev);
      prev = f;
    }
  }
}

TEST_CASE("distribution profile of a geometric-decay series") {
  std::vector<double> d;
  for (int i = 0; i <= 1000; ++i) d.push_back(std::pow(0.5, i));
  auto s = series_of(d);
  std::vector<long long> sched{500, 600, 700, 800, 900, 1000};
  auto profile = distribution_profile(s, {0.1}, sched);
  CHECK(profile.F_lower_est[0] > 0.99);
  CHECK(profile.F_upper_est[0] <= 1.0);
  CHECK(profile.F_upper_est[0] > 0.99);
  CHECK(profile.liminf_orbit_norm_est == d[1000]);
}

TEST_CASE("distribution profile of a constant series is a step in tau") {
  auto s = series_of(std::vector<double>(64, 2.0));
  auto profile = distribution_profile(s, {1.0, 3.0}, {8, 16, 32, 64});
  CHECK(profile.F_lower_est[0] == 0.0);
  CHECK(profile.F_upper_est[0] == 0.0);
  CHECK(profile.F_lower_est[1] == 1.0);
  CHECK(profile.F_upper_est[1] == 1.0);
}

TEST_CASE("distribution profile on the nest witness x_50 series") {
  auto nest = constructions::nest_block_operator(50);
  auto series =
      distance_series(nest.op, nest.witnesses.at(50), SparseVector{}, 200);
  // counting oracle: d_i = 2^i for i <= 50, exactly zero afterwards
  for (int i = 0; i <= 50; ++i) {
    CHECK(series.values[static_cast<std::size_t>(i)] == std::ldexp(1.0, i));
  }
  for (std::size_t i = 51; i < series.values.size(); ++i) {
    CHECK(series.values[i] == 0.0);
  }

  auto tau = default_tau_grid();
  auto profile = distribution_profile(series, tau, {100, 150, 200});
  // F^n(tau) = (n - 51) / n for tau in (0, 1]: all but 51 steps sit at zero,
  // so the tail-window upper estimate climbs toward 1 with n.
  for (std::size_t t = 0; t < tau.size(); ++t) {
    if (tau[t] > 1.0) continue;
    CHECK(profile.F_upper_est[t] ==
          doctest::Approx((200.0 - 51) / 200).epsilon(1e-12));
    CHECK(profile.F_lower_est[t] ==
          doctest::Approx((150.0 - 51) / 150).epsilon(1e-12));
    CHECK(profile.F_lower_est[t] < 0.7);
  }
  auto longer =
      distance_series(nest.op, nest.witnesses.at(50), SparseVector{}, 2000);
  auto profile2 = distribution_profile(longer, {0.5}, {1000, 2000});
  CHECK(profile2.F_upper_est[0] > profile.F_upper_est[0]);
  CHECK(profile2.F_upper_est[0] > 0.97);
}

TEST_CASE("profile estimates are windowed min/max of the F rows") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> d(128);
  for (double& v : d) v = u(rng);
  auto s = series_of(d);
  std::vector<long long> sched{8, 16, 32, 64, 128};
  std::vector<double> tau{0.5, 1.0, 1.5};
  auto profile = distribution_profile(s, tau, sched);
  for (std::size_t t = 0; t < tau.size(); ++t) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t k = sched.size() / 2; k < sched.size(); ++k) {
      double f = dist_fn(s, sched[k], tau[t]);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    CHECK(profile.F_lower_est[t] == lo);
    CHECK(profile.F_upper_est[t] == hi);
    CHECK(profile.F_lower_est[t] <= profile.F_upper_est[t]);
  }
  CHECK(!profile.window_label.empty());
}

TEST_CASE("profile rejects empty grids and bad schedules") {
  auto s = series_of({1, 2, 3, 4});
  CHECK_THROWS_AS(distribution_profile(s, {}, {2}), std::invalid_argument);
  CHECK_THROWS_AS(distribution_profile(s, {0.5}, {}), std::invalid_argument);
  CHECK_THROWS_AS(distribution_profile(s, {0.5, 0.4}, {2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(distribution_profile(s, {0.5}, {2, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(distribution_profile(s, {0.5}, {8}), std::invalid_argument);
}

TEST_CASE("distance series scales linearly in the pair") {
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  OperatorDescription op =
      operators::BilateralShift{operators::PaperExample2Rule{}};
  for (int trial = 0; trial < 40; ++trial) {
    auto x = SparseVector::from_entries(
        {{0, {u(rng), u(rng)}}, {2, {u(rng), u(rng)}}});
    auto y = SparseVector::from_entries({{1, {u(rng), u(rng)}}});
    Complex a{u(rng), u(rng)};
    if (a == Complex{} || (x - y).empty() || (a * x - a * y).empty()) continue;
    auto base = distance_series(op, x, y, 12);
    auto scaled = distance_series(op, a * x, a * y, 12);
    for (std::size_t i = 0; i < base.values.size(); ++i) {
      double expected = std::abs(a) * base.values[i];
      CHECK(std::abs(scaled.values[i] - expected) <=
            1e-12 * std::max(1.0, expected));
    }
  }
}

TEST_CASE("diagonal dichotomy: occupied modulus >= 1 floors the distances") {
  // lambda = i (exact unit modulus), z has that coordinate occupied
  DiagonalTable table;
  table.entries[0] = Complex{0.0, 1.0};
  table.entries[1] = Complex{0.5, 0.0};
  table.default_value = Complex{0.3, 0.0};
  OperatorDescription op = Diagonal{table};
  auto z = SparseVector::from_entries({{0, {0.8, 0.0}}, {1, {3.0, 0.0}}});
  auto series = distance_series(op, z, SparseVector{}, 60);
  for (double d : series.values) CHECK(d >= 0.8 * (1.0 - 1e-12));
}

TEST_CASE("diagonal dichotomy: occupied moduli < 1 give non-increasing distances") {
  DiagonalTable table;
  table.entries[0] = Complex{0.6, 0.3};  // modulus < 0.7
  table.entries[5] = Complex{-0.2, 0.1};
  table.default_value = Complex{2.0, 0.0};  // large but unoccupied
  OperatorDescription op = Diagonal{table};
  auto z = SparseVector::from_entries({{0, {1.0, -2.0}}, {5, {0.5, 0.5}}});
  auto series = distance_series(op, z, SparseVector{}, 80);
  for (std::size_t i = 1; i < series.values.size(); ++i) {
    CHECK(series.values[i] <= series.values[i - 1]);
  }
}

TEST_CASE("Jordan unit-modulus lower bound") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  for (int trial = 0; trial < 25; ++trial) {
    Index n = 2 + static_cast<Index>(rng() % 6);
    double th = angle(rng);
    Complex mu{std::cos(th), std::sin(th)};
    OperatorDescription op = operators::Jordan{mu, n};
    std::vector<SparseVector::Entry> entries;
    Index last = 1 + static_cast<Index>(rng() % (n - 1));
    for (Index j = 0; j < last; ++j) {
      if (rng() % 2) entries.push_back({j, {u(rng), u(rng)}});
    }
    entries.push_back({last, {u(rng) + 1.5, u(rng)}});  // ensure nonzero
    auto y = SparseVector::from_entries(entries);
    double floor = std::abs(y.at(last));
    auto norms = operators::orbit_norms(op, y, 200);
    for (double v : norms) CHECK(v >= floor - 1e-9);
  }
}

TEST_CASE("li_yorke_evidence on the alternating series") {
  std::vector<double> d;
  for (int i = 0; i <= 24; ++i) {
    d.push_back(i % 2 == 0 ? 1.0 : 1.0 / double(i));
  }
  auto evidence = li_yorke_evidence(series_of(d), 0.9, 0.1);
  CHECK(evidence.pass);
  CHECK(evidence.sup_tail == 1.0);
  CHECK(evidence.inf_tail <= 0.1);
}

TEST_CASE("li_yorke_evidence fails on constant and decaying series") {
  auto constant =
      li_yorke_evidence(series_of(std::vector<double>(40, 1.0)), 0.5, 0.05);
  CHECK(!constant.pass);
  CHECK(constant.inf_tail == 1.0);

  OperatorDescription half = Diagonal{ConstantDiagonal{Complex{0.5, 0.0}}};
  auto series = distance_series(half, SparseVector::basis(0),
                                SparseVector::basis(1), 64);
  auto decaying = li_yorke_evidence(series, 0.5, 1e-6);
  CHECK(!decaying.pass);  // sup of the tail is tiny
  CHECK(decaying.sup_tail < 0.5);

  CHECK_THROWS_AS(li_yorke_evidence(series, 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("default grids have the documented shape") {
  auto tau = default_tau_grid();
  REQUIRE(tau.size() == 13);
  CHECK(tau.front() == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(tau.back() == doctest::Approx(1e2).epsilon(1e-12));
  for (std::size_t i = 1; i < tau.size(); ++i) CHECK(tau[i] > tau[i - 1]);

  auto sched = default_n_schedule(1000);
  CHECK(sched.front() == 8);
  CHECK(sched.back() == 1000);
  for (std::size_t i = 1; i < sched.size(); ++i) CHECK(sched[i] > sched[i - 1]);
}
