#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rfim/disorder.hpp"
#include "rfim/rng.hpp"
#include "rfim/spin.hpp"

using namespace rfim;

namespace {
DisorderField zero_field(const Lattice& lat) {
  DisorderField f;
  f.lattice = &lat;
  f.values.assign(lat.num_sites(), 0.0);
  return f;
}

SpinConfig random_config(const Lattice& lat, RngStream& rng) {
  SpinConfig c{&lat, std::vector<std::int8_t>(lat.num_sites())};
  for (auto& s : c.spins) s = rng.next_bool() ? 1 : -1;
  return c;
}
}  // namespace

TEST_CASE("energy of the all-plus state") {
  const Lattice lat = Lattice::build(2, 1);
  const DisorderField f = zero_field(lat);
  const SpinConfig plus = SpinConfig::all_plus(lat);
  CHECK(energy({1.0, 0.0, Interaction::Ferro}, f, plus) == doctest::Approx(-12.0));
  CHECK(energy({1.0, 0.0, Interaction::Antiferro}, f, plus) == doctest::Approx(12.0));
}

TEST_CASE("single-site energy with a field") {
  const Lattice lat = Lattice::build(2, 0);
  DisorderField f = zero_field(lat);
  f.values[0] = 2.0;
  const SpinConfig plus = SpinConfig::all_plus(lat);
  CHECK(energy({1.0, 1.0, Interaction::Ferro}, f, plus) == doctest::Approx(-2.0));
}

TEST_CASE("magnetization basics") {
  const Lattice lat = Lattice::build(2, 1);
  const SpinConfig plus = SpinConfig::all_plus(lat);
  CHECK(magnetization(plus) == doctest::Approx(1.0));
  const SpinConfig checker = gauge_map(plus);  // + on even-parity sites
  CHECK(magnetization(checker) == doctest::Approx(1.0 / 9.0));
  SpinConfig flip = plus;
  for (auto& s : flip.spins) s = -s;
  CHECK(magnetization(flip) == doctest::Approx(-magnetization(plus)));
}

TEST_CASE("overlap basics") {
  const Lattice lat = Lattice::build(2, 1);
  RngStream rng(derive_key(1, {2}));
  const SpinConfig a = random_config(lat, rng);
  SpinConfig b = a;
  for (auto& s : b.spins) s = -s;
  CHECK(overlap(a, a) == doctest::Approx(1.0));
  CHECK(overlap(a, b) == doctest::Approx(-1.0));
  const SpinConfig plus = SpinConfig::all_plus(lat);
  CHECK(overlap(plus, gauge_map(plus)) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("overlap requires a shared lattice") {
  const Lattice a = Lattice::build(2, 1);
  const Lattice b = Lattice::build(2, 1);
  CHECK_THROWS_AS(overlap(SpinConfig::all_plus(a), SpinConfig::all_plus(b)),
                  std::invalid_argument);
}

TEST_CASE("field log-weight") {
  const Lattice lat = Lattice::build(2, 1);
  DisorderField f = zero_field(lat);
  const SpinConfig plus = SpinConfig::all_plus(lat);
  CHECK(field_log_weight(plus, f, 1.0, 0.0) == 0.0);

  f.values.assign(9, 1.0);
  CHECK(field_log_weight(plus, f, 1.0, 1.0) == doctest::Approx(3.0));
  SpinConfig minus = plus;
  for (auto& s : minus.spins) s = -s;
  CHECK(field_log_weight(minus, f, 1.0, 1.0) == doctest::Approx(-3.0));
}

TEST_CASE("energy splits as zero-field part minus L/beta") {
  const Lattice lat = Lattice::build(2, 2);
  const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 31);
  RngStream rng(derive_key(4, {4}));
  for (int rep = 0; rep < 20; ++rep) {
    const SpinConfig c = random_config(lat, rng);
    const double beta = 0.7, h = 1.3;
    const double lhs = energy({beta, h, Interaction::Ferro}, f, c);
    const double rhs = energy({beta, 0.0, Interaction::Ferro}, f, c) -
                       field_log_weight(c, f, beta, h) / beta;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("gauge map is an involution preserving overlaps") {
  const Lattice lat = Lattice::build(3, 1);
  RngStream rng(derive_key(5, {6}));
  const SpinConfig a = random_config(lat, rng);
  const SpinConfig b = random_config(lat, rng);
  const SpinConfig ga = gauge_map(a);
  CHECK(gauge_map(ga).spins == a.spins);
  CHECK(overlap(gauge_map(a), gauge_map(b)) == doctest::Approx(overlap(a, b)).epsilon(1e-15));
}

TEST_CASE("magnetization of the gauge image equals the staggered sum") {
  const Lattice lat = Lattice::build(2, 2);
  RngStream rng(derive_key(6, {6}));
  const SpinConfig c = random_config(lat, rng);
  double staggered = 0;
  for (int i = 0; i < lat.num_sites(); ++i) staggered += lat.parity(i) * c.spins[i];
  staggered /= lat.num_sites();
  CHECK(magnetization(gauge_map(c)) == doctest::Approx(staggered).epsilon(1e-15));
}

TEST_CASE("exact gauge equivalence of energies") {
  RngStream rng(derive_key(7, {7}));
  for (int d : {2, 3}) {
    for (int n = 0; n <= (d == 2 ? 2 : 1); ++n) {
      const Lattice lat = Lattice::build(d, n);
      const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 17 + n);
      const DisorderField flipped = gauge_flip_field(f);
      for (int rep = 0; rep < 10; ++rep) {
        const SpinConfig c = random_config(lat, rng);
        const double beta = 0.6, h = 0.9;
        const double lhs = energy({beta, h, Interaction::Antiferro}, f, gauge_map(c));
        const double rhs = energy({beta, h, Interaction::Ferro}, flipped, c);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("single-flip energy difference matches recomputation") {
  const Lattice lat = Lattice::build(2, 2);
  const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 41);
  RngStream rng(derive_key(8, {8}));
  for (Interaction inter : {Interaction::Ferro, Interaction::Antiferro}) {
    const ModelParams params{0.8, 0.7, inter};
    SpinConfig c = random_config(lat, rng);
    for (int rep = 0; rep < 30; ++rep) {
      const int site = static_cast<int>(rng.next_below(lat.num_sites()));
      const double before = energy(params, f, c);
      const double delta = flip_delta_energy(params, f, c, site);
      c.spins[site] = static_cast<std::int8_t>(-c.spins[site]);
      CHECK(energy(params, f, c) - before == doctest::Approx(delta).epsilon(1e-10));
    }
  }
}

TEST_CASE("spin serialization round trips and validates") {
  const Lattice lat = Lattice::build(2, 1);
  RngStream rng(derive_key(9, {9}));
  const SpinConfig c = random_config(lat, rng);
  std::stringstream ss;
  write_spins_csv(ss, c);
  CHECK(read_spins_csv(ss, lat).spins == c.spins);
  std::stringstream bad("1,1,0,1,1,1,1,1,1\n");
  CHECK_THROWS(read_spins_csv(bad, lat));
  std::stringstream bin;
  write_spins_binary(bin, c);
  CHECK(read_spins_binary(bin, lat).spins == c.spins);
}
