#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rfim/enumerate.hpp"

using namespace rfim;

namespace {
DisorderField zero_field(const Lattice& lat) {
  DisorderField f;
  f.lattice = &lat;
  f.values.assign(lat.num_sites(), 0.0);
  return f;
}
}  // namespace

TEST_CASE("zero-field magnetization vanishes by symmetry") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = zero_field(lat);
  const EnumerationResult res = exact_enumerate({0.7, 0.0, Interaction::Ferro}, f);
  CHECK(std::abs(res.m_mean) < 1e-14);
  for (double s : res.site_mean) CHECK(std::abs(s) < 1e-14);
}

TEST_CASE("independent spins give overlap second moment 1/N") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = zero_field(lat);
  EnumerationOptions opt;
  opt.pair_means = true;
  const EnumerationResult res = exact_enumerate({1e-300, 0.0, Interaction::Ferro}, f, opt);
  CHECK(res.overlap2_mean() == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(res.overlap_mean() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("golden two-point value at beta=0.3 with a fixed gaussian field") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 12345);
  EnumerationOptions opt;
  opt.pair_means = true;
  const EnumerationResult res = exact_enumerate({0.3, 1.0, Interaction::Ferro}, f, opt);
  const int a = lat.site_of(std::vector<int>{0, 0});
  const int b = lat.site_of(std::vector<int>{1, 1});
  // Regression fixture frozen from this enumeration.
  CHECK(res.pair(a, b) == doctest::Approx(0.17764314509673171).epsilon(1e-12));
}

TEST_CASE("single-site model matches the closed form") {
  const Lattice lat = Lattice::build(2, 0);
  DisorderField f = zero_field(lat);
  f.values[0] = 1.7;
  const double beta = 0.8, h = 0.9;
  const EnumerationResult res = exact_enumerate({beta, h, Interaction::Ferro}, f);
  CHECK(res.site_mean[0] == doctest::Approx(std::tanh(beta * h * 1.7)).epsilon(1e-12));
  CHECK(res.log_z == doctest::Approx(std::log(2.0 * std::cosh(beta * h * 1.7))).epsilon(1e-12));
}

TEST_CASE("enumeration cap is enforced") {
  const Lattice lat = Lattice::build(2, 2);  // 25 sites
  const DisorderField f = zero_field(lat);
  CHECK_THROWS_AS(exact_enumerate({0.5, 0.0, Interaction::Ferro}, f), std::invalid_argument);
}

TEST_CASE("zero-field energy distribution sits on the even levels") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = zero_field(lat);
  EnumerationOptions opt;
  opt.energy_distribution = true;
  const EnumerationResult res = exact_enumerate({0.3, 0.0, Interaction::Ferro}, f, opt);
  double total = 0;
  for (const auto& [e, p] : res.energy_dist) {
    total += p;
    CHECK(std::abs(e - std::round(e)) < 1e-9);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.energy_dist.front().first == doctest::Approx(-12.0));
}

TEST_CASE("generic expectation agrees with the precomputed moments") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 9);
  const ModelParams params{0.5, 0.6, Interaction::Ferro};
  const EnumerationResult res = exact_enumerate(params, f);
  CHECK(exact_expectation(params, f, [](const SpinConfig&) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(exact_expectation(params, f, [](const SpinConfig& c) { return magnetization(c); }) ==
        doctest::Approx(res.m_mean).epsilon(1e-12));
}

TEST_CASE("antiferro enumeration flips the bond term") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = zero_field(lat);
  const EnumerationResult ferro = exact_enumerate({0.4, 0.0, Interaction::Ferro}, f);
  const EnumerationResult anti = exact_enumerate({0.4, 0.0, Interaction::Antiferro}, f);
  // At h=0 the gauge map identifies the two partition functions exactly.
  CHECK(ferro.log_z == doctest::Approx(anti.log_z).epsilon(1e-12));
}
