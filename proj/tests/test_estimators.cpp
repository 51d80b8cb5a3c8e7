#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfim/enumerate.hpp"
#include "rfim/estimators.hpp"
#include "rfim/fk.hpp"
#include "rfim/samplers.hpp"

using namespace rfim;

namespace {

DisorderField zero_field(const Lattice& lat) {
  DisorderField f;
  f.lattice = &lat;
  f.values.assign(lat.num_sites(), 0.0);
  return f;
}

SampleArchive constant_archive(const Lattice& lat, int copies, std::int8_t sign) {
  SampleArchive ar;
  ar.init(lat, copies);
  SpinConfig c = SpinConfig::all_plus(lat);
  for (auto& s : c.spins) s = sign;
  for (int i = 0; i < copies; ++i) ar.append(c, lat);
  return ar;
}

SampleArchive zero_field_archive(const Lattice& lat, double beta, int samples,
                                 std::uint64_t seed) {
  SampleSchedule sched;
  sched.update_kind = UpdateKind::Cluster;
  sched.burn_in_sweeps = 400;
  sched.thinning = 2;
  sched.samples = samples;
  const DisorderField none = zero_field(lat);
  return run_chain(lat, {beta, 0.0, Interaction::Ferro}, none, sched, seed);
}

EstimatorBudgets small_budgets() {
  EstimatorBudgets b;
  b.triples = 400;
  b.site_tuples = 64;
  b.pairs = 200;
  b.quads = 200;
  b.ks_pairs = 128;
  b.pure_state_lmax = 3;
  return b;
}

}  // namespace

TEST_CASE("degenerate record: all samples identical all-plus") {
  const Lattice lat = Lattice::build(2, 1);
  const SampleArchive ar = constant_archive(lat, 60, 1);
  const DisorderField f = zero_field(lat);
  RecordParams rp;
  rp.beta = 0.6;
  rp.h = 0.0;
  rp.weight_h = 0.0;
  rp.q_hat = 0.9;
  const QuenchedRecord rec = compute_quenched_record(lat, ar, f, rp, small_budgets(), 1);
  REQUIRE(rec.valid);
  // R = 1 on every pair: the concentration statistic is (1 - q^2)^2 and the
  // magnetization spread statistic is (1 - q)^2.
  CHECK(rec.r4c_mean == doctest::Approx(std::pow(1.0 - 0.81, 2)).epsilon(1e-9));
  CHECK(rec.msq_dev == doctest::Approx(std::pow(1.0 - 0.9, 2)).epsilon(1e-9));
  CHECK(rec.ultra_violation_rate == 0.0);
  CHECK(rec.r_mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rec.site_uniformity == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identical replicas classify as the aligned support point") {
  const Lattice lat = Lattice::build(2, 1);
  const SampleArchive ar = constant_archive(lat, 30, 1);
  const DisorderField f = zero_field(lat);
  RecordParams rp;
  rp.beta = 0.5;
  rp.h = 0.0;
  rp.weight_h = 0.0;
  rp.q_hat = 1.0;
  const QuenchedRecord rec = compute_quenched_record(lat, ar, f, rp, small_budgets(), 2);
  REQUIRE(rec.valid);
  CHECK(rec.mass_qqq == doctest::Approx(1.0));
  CHECK(rec.mass_unclassified == doctest::Approx(0.0));
  CHECK(rec.sign_agreement == doctest::Approx(1.0));
}

TEST_CASE("mixed sign replicas produce the paired pattern without violations") {
  const Lattice lat = Lattice::build(2, 1);
  SampleArchive ar;
  ar.init(lat, 60);
  SpinConfig plus = SpinConfig::all_plus(lat);
  SpinConfig minus = plus;
  for (auto& s : minus.spins) s = -1;
  for (int i = 0; i < 40; ++i) ar.append(plus, lat);
  for (int i = 0; i < 20; ++i) ar.append(minus, lat);
  const DisorderField f = zero_field(lat);
  RecordParams rp;
  rp.beta = 0.5;
  rp.h = 0.0;
  rp.weight_h = 0.0;
  rp.q_hat = 1.0;
  const QuenchedRecord rec = compute_quenched_record(lat, ar, f, rp, small_budgets(), 3);
  REQUIRE(rec.valid);
  CHECK(rec.ultra_violation_rate == 0.0);
  CHECK(rec.mass_unclassified == doctest::Approx(0.0));
  const double a = rec.mass_qqq;
  const double b_total = rec.mass_mixed[0] + rec.mass_mixed[1] + rec.mass_mixed[2];
  CHECK(a + b_total == doctest::Approx(1.0));
  CHECK(rec.sign_agreement == doctest::Approx(1.0));
  // Exact pairwise r_mean: p = 2/3 plus-fraction gives (p - (1-p))^2 = 1/9 in
  // the i.i.d. limit; the diagonal-corrected estimator must be close.
  CHECK(rec.r_mean == doctest::Approx(1.0 / 9.0).epsilon(0.05));
}

TEST_CASE("gg statistic vanishes on constant records and predicts -q^2 at h=0") {
  DisorderSweep sweep;
  sweep.q_hat = 0.9479;
  sweep.beta = 0.6;
  sweep.h = 0.0;
  for (int i = 0; i < 250; ++i) {
    QuenchedRecord r;
    r.valid = true;
    r.r_mean = 0.4;
    r.r2_mean = 0.16;
    r.rr13_mean = 0.16;
    sweep.records.push_back(r);
  }
  const GaussHermite gh = GaussHermite::make(64);
  const GgResult res = gg_residual(sweep, gh, 500, 7);
  CHECK(res.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.predicted == doctest::Approx(-0.9479 * 0.9479).epsilon(1e-9));
}

TEST_CASE("gg requires enough disorder realizations") {
  DisorderSweep sweep;
  sweep.q_hat = 0.9;
  QuenchedRecord r;
  r.valid = true;
  sweep.records.assign(10, r);
  const GaussHermite gh = GaussHermite::make(32);
  CHECK_THROWS_AS(gg_residual(sweep, gh, 100, 1), std::invalid_argument);
}

TEST_CASE("free energy variance: zero field gives zero variance and bound") {
  const Lattice lat = Lattice::build(2, 1);
  const SampleArchive ar = zero_field_archive(lat, 0.5, 200, 11);
  DisorderSweep sweep;
  sweep.beta = 0.5;
  sweep.h = 0.0;
  sweep.kind = DisorderKind::Gaussian;
  sweep.q_hat = 0.9;
  for (int i = 0; i < 8; ++i) {
    const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 100 + i);
    RecordParams rp;
    rp.beta = 0.5;
    rp.h = 0.0;
    rp.weight_h = 0.0;
    rp.q_hat = 0.9;
    QuenchedRecord rec = compute_quenched_record(lat, ar, f, rp, small_budgets(), 20 + i);
    sweep.records.push_back(rec);
  }
  const FreeEnergyVarStats st = free_energy_variance(sweep);
  CHECK(st.var == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(st.bound == doctest::Approx(0.0));
  CHECK(st.bound_applicable);
}

TEST_CASE("free energy variance bound holds at enumeration scale") {
  // Var over gaussian disorder of log Z(J) - log Z(0) is bounded by
  // beta^2 h^2; both partition functions are exact here.
  const Lattice lat = Lattice::build(2, 1);
  const double beta = 0.6, h = 1.0;
  const DisorderField none = zero_field(lat);
  const double log_z0 = exact_enumerate({beta, 0.0, Interaction::Ferro}, none).log_z;
  MeanVar mv;
  for (int seed = 0; seed < 1000; ++seed) {
    const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 5000 + seed);
    const double log_z = exact_enumerate({beta, h, Interaction::Ferro}, f).log_z;
    mv.add(log_z - log_z0);
  }
  CHECK(mv.var() <= beta * beta * h * h);
}

TEST_CASE("rademacher disorder marks the gaussian bound not applicable") {
  DisorderSweep sweep;
  sweep.beta = 0.5;
  sweep.h = 1.0;
  sweep.kind = DisorderKind::Rademacher;
  QuenchedRecord r;
  r.valid = true;
  r.log_mgf = 0.1;
  sweep.records.assign(5, r);
  CHECK_FALSE(free_energy_variance(sweep).bound_applicable);
}

TEST_CASE("tuple product expectations coincide across estimator paths") {
  // With uniform weights the weighted tuple-product mean must equal the plain
  // average used by the correlation-uniformity path.
  const Lattice lat = Lattice::build(2, 1);
  const SampleArchive ar = zero_field_archive(lat, 0.5, 500, 13);
  const DisorderField f = zero_field(lat);
  const ReweightContext ctx = ReweightContext::from_archive(ar, f, 0.5, 0.0);
  const int i = 2, j = 6;
  const double weighted = ctx.expect([&](int t) {
    return static_cast<double>(ar.row(t)[i]) * ar.row(t)[j];
  });
  long acc = 0;
  for (int t = 0; t < ar.size(); ++t) acc += ar.row(t)[i] * ar.row(t)[j];
  CHECK(weighted == doctest::Approx(static_cast<double>(acc) / ar.size()).epsilon(1e-12));
}

TEST_CASE("mgf gap: zero coefficients give zero gap") {
  const Lattice lat = Lattice::build(2, 1);
  const std::vector<double> a(lat.num_sites(), 0.0);
  const MgfGapReport rep = mgf_gap(lat, a, DisorderKind::Gaussian, 100, 1, 0.5);
  CHECK(rep.reference == doctest::Approx(1.0));
  CHECK(rep.empirical_gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.exact_gap == 0.0);
  CHECK_FALSE(rep.violates);
}

TEST_CASE("mgf gap: gaussian population value is exact") {
  const Lattice lat = Lattice::build(2, 2);
  std::vector<double> a(lat.num_sites());
  RngStream rng(derive_key(31, {1}));
  for (double& v : a) v = rng.next_unit();
  const MgfGapReport rep = mgf_gap(lat, a, DisorderKind::Gaussian, 4000, 2, 0.5);
  CHECK(rep.exact_gap == 0.0);
  CHECK(rep.empirical_gap < 4.0 * rep.empirical_se + 1e-9);
  CHECK_FALSE(rep.violates);
}

TEST_CASE("mgf gap: rademacher matches the binomial oracle and the fitted C") {
  const Lattice lat = Lattice::build(2, 4);  // 81 sites
  const std::vector<double> a(lat.num_sites(), 1.0);
  const MgfGapReport rep = mgf_gap(lat, a, DisorderKind::Rademacher, 2000, 3, 0.5);
  const double oracle_value = oracle::rademacher_mgf_all_ones(81);
  CHECK(std::abs(rep.reference - std::exp(0.5)) < 1e-12);
  CHECK(rep.exact_gap == doctest::Approx(std::abs(oracle_value - std::exp(0.5))).epsilon(1e-10));
  CHECK(rep.bound_candidate == doctest::Approx(81.0 / std::pow(81.0, 1.5)).epsilon(1e-12));
  CHECK_FALSE(rep.violates);  // C = 0.5 frozen after the calibration below
  // The fitted constant: gap / bound is comfortably below C.
  CHECK(rep.exact_gap / rep.bound_candidate < 0.5);
}

TEST_CASE("mgf gap enforces the coefficient bound") {
  const Lattice lat = Lattice::build(2, 1);
  std::vector<double> a(lat.num_sites(), 3.0);
  CHECK_THROWS_AS(mgf_gap(lat, a, DisorderKind::Gaussian, 10, 1, 0.5, 4.0),
                  std::invalid_argument);
}

TEST_CASE("correlation uniformity rejects impossible windows") {
  const Lattice lat = Lattice::build(2, 1);
  const SampleArchive ar = zero_field_archive(lat, 0.5, 50, 17);
  CHECK_THROWS_AS(correlation_uniformity(lat, ar, 0.9, 0.9, small_budgets(), 1),
                  std::invalid_argument);
}

TEST_CASE("relaxed-window pair deviations match enumeration at 3x3") {
  const Lattice lat = Lattice::build(2, 1);
  const double beta = 0.6;
  const SampleArchive ar = zero_field_archive(lat, beta, 40000, 19);
  const DisorderField none = zero_field(lat);
  EnumerationOptions opt;
  opt.pair_means = true;
  const EnumerationResult exact = exact_enumerate({beta, 0.0, Interaction::Ferro}, none, opt);
  const double q_ref = exact.pair(0, 1);

  // delta over all distinct pairs, MC vs exact.
  double delta_mc = 0, delta_exact = 0;
  for (int i = 0; i < lat.num_sites(); ++i) {
    for (int j = i + 1; j < lat.num_sites(); ++j) {
      long acc = 0;
      for (int t = 0; t < ar.size(); ++t) acc += ar.row(t)[i] * ar.row(t)[j];
      delta_mc = std::max(delta_mc, std::abs(static_cast<double>(acc) / ar.size() - q_ref));
      delta_exact = std::max(delta_exact, std::abs(exact.pair(i, j) - q_ref));
    }
  }
  CHECK(delta_mc == doctest::Approx(delta_exact).epsilon(0.0).scale(1.0).epsilon(0.35));
  CHECK(std::abs(delta_mc - delta_exact) < 0.02);
}

TEST_CASE("correlation uniformity runs on a real window") {
  const Lattice lat = Lattice::build(2, 8);
  const SampleArchive ar = zero_field_archive(lat, 0.6, 1500, 23);
  const double q_hat = std::pow(onsager_sqrt_q(0.6), 2);
  EstimatorBudgets b = small_budgets();
  b.pairs = 300;
  b.quads = 200;
  b.site_tuples = 200;
  const CorrelationUniformity cu = correlation_uniformity(lat, ar, q_hat, 0.25, b, 5);
  CHECK(cu.pairs_used > 0);
  CHECK(cu.quads_used > 0);
  CHECK(cu.delta_hat < 0.25);
  CHECK(cu.gamma_hat < 0.35);
  CHECK(cu.even_l2_residual < 0.2);
  CHECK(cu.even_l4_residual < 0.3);
}

TEST_CASE("small-h reweighting leaves the overlap law in place") {
  const Lattice lat = Lattice::build(2, 2);
  const SampleArchive ar = zero_field_archive(lat, 0.6, 800, 29);
  const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 31);
  RecordParams rp;
  rp.beta = 0.6;
  rp.h = 1e-8;
  rp.weight_h = 1e-8;
  rp.q_hat = 0.9479;
  const QuenchedRecord rec = compute_quenched_record(lat, ar, f, rp, small_budgets(), 37);
  REQUIRE(rec.valid);
  CHECK(rec.ks_vs_zero_field < 1e-6);
}

TEST_CASE("pure state moment test respects the cap") {
  DisorderSweep sweep;
  QuenchedRecord r;
  r.valid = true;
  r.pure_state_residual = {0.1, 0.1, 0.1};
  sweep.records.assign(3, r);
  CHECK_THROWS_AS(pure_state_moment_test(sweep, 7), std::invalid_argument);
  const PureStateStats st = pure_state_moment_test(sweep, 3);
  CHECK(st.residual_mean.size() == 3);
  CHECK(st.residual_mean[0] == doctest::Approx(0.1));
}

TEST_CASE("at h=0 the nsa residual collapses to the overlap mean square") {
  // X_n = 0 for every disorder, so the prediction q tanh^2(X) vanishes and the
  // residual second moment is E[<R>^2], which is small by symmetry.
  const Lattice lat = Lattice::build(2, 8);
  const SampleArchive ar = zero_field_archive(lat, 0.6, 1200, 41);
  DisorderSweep sweep;
  sweep.beta = 0.6;
  sweep.h = 0.0;
  sweep.q_hat = 0.9479;
  sweep.kind = DisorderKind::Gaussian;
  EstimatorBudgets b = small_budgets();
  for (int k = 0; k < 12; ++k) {
    const DisorderField f = sample_disorder(lat, DisorderKind::Gaussian, 900 + k);
    RecordParams rp;
    rp.beta = 0.6;
    rp.h = 0.0;
    rp.weight_h = 0.0;
    rp.q_hat = 0.9479;
    QuenchedRecord rec = compute_quenched_record(lat, ar, f, rp, b, 50 + k);
    REQUIRE(rec.valid);
    CHECK(rec.field_sum == 0.0);
    sweep.records.push_back(std::move(rec));
  }
  const NsaStats st = nsa_stats(sweep, 12);
  CHECK(st.residual_sq_mean < 0.05);
  // l = 1 moment residual targets |<s_j> - 0| at h = 0, small by symmetry.
  const PureStateStats ps = pure_state_moment_test(sweep, 1);
  CHECK(ps.residual_mean[0] < 0.2);
}

TEST_CASE("nsa stats gate on the disorder count") {
  DisorderSweep sweep;
  sweep.q_hat = 0.9;
  QuenchedRecord r;
  r.valid = true;
  sweep.records.assign(50, r);
  CHECK_THROWS_AS(nsa_stats(sweep), std::invalid_argument);
  CHECK_NOTHROW(nsa_stats(sweep, 50));
}
