#include <doctest.h>

#include <cmath>
#include <vector>

#include "rfim/rng.hpp"
#include "rfim/stats.hpp"

using namespace rfim;

TEST_CASE("running mean and variance") {
  MeanVar mv;
  for (double x : {1.0, 2.0, 3.0, 4.0}) mv.add(x);
  CHECK(mv.mean == doctest::Approx(2.5));
  CHECK(mv.var() == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("batch means error of an i.i.d. series") {
  RngStream rng(derive_key(1, {1}));
  std::vector<double> xs(20000);
  for (double& x : xs) x = rng.next_gaussian();
  const double se = batch_means_se(xs);
  CHECK(se == doctest::Approx(1.0 / std::sqrt(20000.0)).epsilon(0.5));
}

TEST_CASE("histogram accumulates and normalizes") {
  Histogram h(0.0, 1.0, 4);
  h.add(0.1);
  h.add(0.35);
  h.add(0.9);
  h.add(2.0);  // clamped into the last bin
  const auto p = h.probs();
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[3] == doctest::Approx(0.5));
}

TEST_CASE("total variation distance extremes") {
  const std::vector<double> a = {1.0, 0.0};
  const std::vector<double> b = {0.0, 1.0};
  CHECK(tv_distance(a, a) == doctest::Approx(0.0));
  CHECK(tv_distance(a, b) == doctest::Approx(1.0));
}

TEST_CASE("ks statistic against the true cdf is small for true samples") {
  RngStream rng(derive_key(2, {1}));
  std::vector<double> xs(4000);
  for (double& x : xs) x = rng.next_unit();
  const double ks = ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks < 2.0 / std::sqrt(4000.0));
  const double ks_shifted =
      ks_statistic(xs, [](double x) { return std::clamp(x - 0.2, 0.0, 1.0); });
  CHECK(ks_shifted == doctest::Approx(0.2).epsilon(0.15));
}

TEST_CASE("two-weighting ks vanishes for identical weights") {
  RngStream rng(derive_key(3, {1}));
  std::vector<double> vals(500), wa(500), wb(500);
  for (int i = 0; i < 500; ++i) {
    vals[i] = rng.next_unit();
    wa[i] = 2.0;
    wb[i] = 0.5;
  }
  CHECK(ks_two_weightings(vals, wa, wb) < 1e-12);
  // Weighting the upper half doubles its mass; KS picks up the gap.
  for (int i = 0; i < 500; ++i) wa[i] = vals[i] > 0.5 ? 2.0 : 1.0;
  CHECK(ks_two_weightings(vals, wa, wb) > 0.05);
}

TEST_CASE("bootstrap interval for a gaussian mean behaves sanely") {
  RngStream rng(derive_key(4, {1}));
  std::vector<double> xs(400);
  for (double& x : xs) x = rng.next_gaussian();
  RngStream boot(derive_key(4, {2}));
  const auto ci = bootstrap_ci(400, 1000, 0.95, boot, [&](std::span<const int> idx) {
    double s = 0;
    for (int i : idx) s += xs[i];
    return s / static_cast<double>(idx.size());
  });
  CHECK(ci.lo < 0.0);
  CHECK(ci.hi > 0.0);
  CHECK(ci.hi - ci.lo < 0.3);
  CHECK(ci.hi - ci.lo > 0.1);
}

TEST_CASE("gauss-hermite integrates gaussian moments exactly") {
  const GaussHermite gh = GaussHermite::make(64);
  CHECK(gh.expect([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gh.expect([](double z) { return z; }) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gh.expect([](double z) { return z * z; }) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gh.expect([](double z) { return z * z * z * z; }) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gauss-hermite tanh^2 expectation matches dense quadrature") {
  const GaussHermite gh = GaussHermite::make(64);
  const double a = 0.584;
  const double via_gh = gh.expect([&](double z) {
    const double t = std::tanh(a * z);
    return t * t;
  });
  // Simpson integral over [-10, 10] with the normal density.
  const int steps = 20000;
  double acc = 0;
  const double lo = -10.0, hi = 10.0, dx = (hi - lo) / steps;
  for (int i = 0; i <= steps; ++i) {
    const double z = lo + i * dx;
    const double t = std::tanh(a * z);
    const double f = t * t * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    acc += f * ((i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  acc *= dx / 3.0;
  CHECK(via_gh == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("normal cdf reference points") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
}

TEST_CASE("tanh-square law cdf matches simulation") {
  const double q = 0.9479, a = 0.584;
  CHECK(tanh_sq_law_cdf(-0.1, q, a) == 0.0);
  CHECK(tanh_sq_law_cdf(q + 0.1, q, a) == 1.0);
  RngStream rng(derive_key(5, {1}));
  std::vector<double> ys(100000);
  for (double& y : ys) {
    const double t = std::tanh(a * rng.next_gaussian());
    y = q * t * t;
  }
  const double ks = ks_statistic(ys, [&](double y) { return tanh_sq_law_cdf(y, q, a); });
  CHECK(ks < 0.01);
}

TEST_CASE("effective sample size of uniform weights is the count") {
  std::vector<double> w(123, 0.4);
  CHECK(effective_sample_size(w) == doctest::Approx(123.0).epsilon(1e-12));
  std::vector<double> spike(10, 0.0);
  spike[3] = 5.0;
  CHECK(effective_sample_size(spike) == doctest::Approx(1.0).epsilon(1e-12));
}
