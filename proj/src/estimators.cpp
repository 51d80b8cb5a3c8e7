#include "rfim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfim {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

MeanVar collect(const std::vector<const QuenchedRecord*>& recs,
                double (*get)(const QuenchedRecord&)) {
  MeanVar mv;
  for (const QuenchedRecord* r : recs) mv.add(get(*r));
  return mv;
}

}  // namespace

std::vector<const QuenchedRecord*> DisorderSweep::valid_records() const {
  std::vector<const QuenchedRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (r.valid) out.push_back(&r);
  return out;
}

QuenchedRecord compute_quenched_record(const Lattice& lat, const SampleArchive& archive,
                                       const DisorderField& field, const RecordParams& params,
                                       const EstimatorBudgets& budgets,
                                       std::uint64_t estimator_key) {
  QuenchedRecord rec;
  rec.disorder_seed = field.seed;
  rec.field_sum = params.h == 0.0
                      ? 0.0
                      : scaled_field_sum(field, params.q_hat, params.beta, params.h);

  const ReweightContext ctx =
      ReweightContext::from_archive(archive, field, params.beta, params.weight_h);
  rec.ess = ctx.ess();
  rec.log_mgf = ctx.log_mean_exp();
  rec.mean_weight = ctx.mean_weight();
  rec.mean_weight_se = ctx.mean_weight_se();
  rec.jensen_ok = rec.mean_weight >= 1.0 - 3.0 * rec.mean_weight_se;
  if (ctx.ess() < budgets.ess_floor) {
    rec.error = "effective sample size " + std::to_string(ctx.ess()) + " below floor";
    return rec;
  }
  const int nsamp = archive.size();
  if (nsamp < 3) {
    rec.error = "need at least 3 samples";
    return rec;
  }

  const double q = params.q_hat;
  const std::vector<double>& phys_m = params.staggered_m ? archive.stag_mag : archive.mag;
  const std::vector<double>& frame_m =
      params.staggered_frame ? archive.stag_mag : archive.mag;  // factorization frame

  rec.m_mean = ctx.expect(phys_m);
  rec.m_abs_mean = ctx.expect([&](int t) { return std::abs(phys_m[t]); });
  rec.m2_mean = ctx.expect([&](int t) { return phys_m[t] * phys_m[t]; });
  rec.msq_dev = ctx.expect([&](int t) {
    const double d = phys_m[t] * phys_m[t] - q;
    return d * d;
  });
  rec.plus_state_weight = ctx.expect([&](int t) { return frame_m[t] > 0.0 ? 1.0 : 0.0; });

  // Per-site weighted means over the site budget (all sites when they fit).
  const int nsites = archive.num_sites;
  std::vector<int> site_subset;
  RngStream rng(derive_key(estimator_key, {rng_tag::kEstimator}));
  if (nsites <= budgets.sites) {
    site_subset.resize(nsites);
    for (int i = 0; i < nsites; ++i) site_subset[i] = i;
  } else {
    std::vector<int> all(nsites);
    for (int i = 0; i < nsites; ++i) all[i] = i;
    for (int i = 0; i < budgets.sites; ++i) {
      const int j = i + static_cast<int>(rng.next_below(nsites - i));
      std::swap(all[i], all[j]);
      site_subset.push_back(all[i]);
    }
    std::sort(site_subset.begin(), site_subset.end());
  }
  std::vector<double> site_mean(site_subset.size(), 0.0);
  {
    const bool full = static_cast<int>(site_subset.size()) == nsites;
    const auto w = ctx.weights();
    double wsum = 0.0;
    for (int t = 0; t < nsamp; ++t) wsum += w[t];
    for (int t = 0; t < nsamp; ++t) {
      const double wt = w[t];
      const std::int8_t* row = archive.row(t);
      if (full) {
        for (int i = 0; i < nsites; ++i) site_mean[i] += wt * row[i];
      } else {
        for (std::size_t k = 0; k < site_subset.size(); ++k)
          site_mean[k] += wt * row[site_subset[k]];
      }
    }
    for (double& v : site_mean) v /= wsum;
  }

  // Exact all-pairs overlap mean via site means, with the diagonal removed:
  // sum_i <s_i>^2 / |S| averages R over weighted pairs including t = u.
  {
    double s2 = 0.0;
    for (double v : site_mean) s2 += v * v;
    s2 /= static_cast<double>(site_mean.size());
    const double diag = 1.0 / ctx.ess();
    rec.r_mean = (s2 - diag) / (1.0 - diag);
  }

  // Site uniformity of the physical one-point function.
  {
    double acc = 0.0;
    for (std::size_t k = 0; k < site_subset.size(); ++k) {
      const double sj = params.staggered_m ? lat.parity(site_subset[k]) * site_mean[k]
                                           : site_mean[k];
      const double d = sj - rec.m_mean;
      acc += d * d;
    }
    rec.site_uniformity = acc / static_cast<double>(site_subset.size());
  }

  // Replica triples drawn from the weight-proportional law.
  const int triples = budgets.triples;
  std::vector<std::array<float, 3>> rvals;
  std::vector<std::array<int, 3>> tidx;
  rvals.reserve(triples);
  tidx.reserve(triples);
  for (int k = 0; k < triples; ++k) {
    int a = ctx.draw(rng), b = ctx.draw(rng), c = ctx.draw(rng);
    int tries = 0;
    while ((a == b || a == c || b == c) && tries++ < 64) {
      b = ctx.draw(rng);
      c = ctx.draw(rng);
    }
    if (a == b || a == c || b == c) continue;
    rvals.push_back({static_cast<float>(archive.overlap(a, b)),
                     static_cast<float>(archive.overlap(a, c)),
                     static_cast<float>(archive.overlap(b, c))});
    tidx.push_back({a, b, c});
  }
  const int nt = static_cast<int>(rvals.size());
  if (nt == 0) {
    rec.error = "no distinct replica triples available";
    return rec;
  }

  // Classification window: 0.05 or 3x the observed concentration width.
  {
    double acc = 0.0;
    long cnt = 0;
    for (const auto& r : rvals)
      for (float v : r) {
        const double dev = std::abs(std::abs(static_cast<double>(v)) - q);
        if (dev <= 0.2) {
          acc += dev * dev;
          ++cnt;
        }
      }
    const double width = cnt > 0 ? std::sqrt(acc / static_cast<double>(cnt)) : 0.0;
    rec.class_window = std::max(0.05, 3.0 * width);
  }
  const double delta = rec.class_window;

  double sum_r = 0, sum_r2 = 0, sum_r4c = 0, sum_rr = 0, sum_mm = 0;
  long viol = 0, near_pm = 0, near_pos = 0;
  long cls[4] = {0, 0, 0, 0};
  long uncls = 0, sign_agree = 0, sign_total = 0;
  rec.overlap_hist.fill(0.0);
  for (int k = 0; k < nt; ++k) {
    const double r12 = rvals[k][0], r13 = rvals[k][1], r23 = rvals[k][2];
    sum_r += (r12 + r13 + r23) / 3.0;
    sum_r2 += (r12 * r12 + r13 * r13 + r23 * r23) / 3.0;
    const double c12 = r12 * r12 - q * q, c13 = r13 * r13 - q * q, c23 = r23 * r23 - q * q;
    sum_r4c += (c12 * c12 + c13 * c13 + c23 * c23) / 3.0;
    sum_rr += (r12 * r13 + r12 * r23 + r13 * r23) / 3.0;
    const double m1 = frame_m[tidx[k][0]], m2 = frame_m[tidx[k][1]], m3 = frame_m[tidx[k][2]];
    const double d12 = r12 - m1 * m2, d13 = r13 - m1 * m3, d23 = r23 - m2 * m3;
    sum_mm += (d12 * d12 + d13 * d13 + d23 * d23) / 3.0;
    if (r13 < std::min(r12, r23) - budgets.ultra_eps) ++viol;

    for (double v : {r12, r13, r23}) {
      if (std::abs(v - q) <= 0.05 || std::abs(v + q) <= 0.05) ++near_pm;
      if (std::abs(v - q) <= delta) ++near_pos;
      const int bin = std::clamp(
          static_cast<int>((v + 1.0) / 2.0 * kOverlapHistBins), 0, kOverlapHistBins - 1);
      rec.overlap_hist[bin] += 1.0;
    }
    rec.overlap_draws += 3;

    // Support-point classification of (R12, R13, R23).
    static constexpr double kPts[4][3] = {
        {1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}};
    int which = -1;
    for (int p = 0; p < 4; ++p) {
      if (std::abs(r12 - kPts[p][0] * q) <= delta && std::abs(r13 - kPts[p][1] * q) <= delta &&
          std::abs(r23 - kPts[p][2] * q) <= delta) {
        which = p;
        break;
      }
    }
    if (which >= 0) {
      ++cls[which];
      const int s1 = m1 > 0 ? 1 : -1, s2 = m2 > 0 ? 1 : -1, s3 = m3 > 0 ? 1 : -1;
      int m_which;
      if (s1 * s2 > 0 && s1 * s3 > 0) m_which = 0;
      else if (s1 * s2 < 0 && s1 * s3 < 0) m_which = 1;
      else if (s1 * s2 < 0 && s1 * s3 > 0) m_which = 2;
      else m_which = 3;
      ++sign_total;
      if (m_which == which) ++sign_agree;
    } else {
      ++uncls;
    }
  }
  rec.r_mean_budget = sum_r / nt;
  rec.r2_mean = sum_r2 / nt;
  rec.r4c_mean = sum_r4c / nt;
  rec.rr13_mean = sum_rr / nt;
  rec.r_mm_dev = sum_mm / nt;
  rec.ultra_violation_rate = static_cast<double>(viol) / nt;
  rec.mass_qqq = static_cast<double>(cls[0]) / nt;
  for (int p = 0; p < 3; ++p) rec.mass_mixed[p] = static_cast<double>(cls[p + 1]) / nt;
  rec.mass_unclassified = static_cast<double>(uncls) / nt;
  rec.mass_pos = static_cast<double>(near_pos) / rec.overlap_draws;
  rec.overlap_near_pm = near_pm;
  rec.sign_agreement = sign_total > 0 ? static_cast<double>(sign_agree) / sign_total : 1.0;
  rec.quenched_r_var = std::max(0.0, rec.r2_mean - rec.r_mean * rec.r_mean);

  const int keep = std::min<int>(budgets.stored_triples, nt);
  rec.stored_triples.assign(rvals.begin(), rvals.begin() + keep);

  // Quenched law vs zero-field law on a common set of uniform pairs.
  if (budgets.ks_pairs > 0) {
    std::vector<double> vals, wa, wb;
    vals.reserve(budgets.ks_pairs);
    const auto w = ctx.weights();
    for (int k = 0; k < budgets.ks_pairs; ++k) {
      const int a = static_cast<int>(rng.next_below(nsamp));
      int b = static_cast<int>(rng.next_below(nsamp));
      if (b == a) b = (b + 1) % nsamp;
      vals.push_back(archive.overlap(a, b));
      wa.push_back(w[a] * w[b]);
      wb.push_back(1.0);
    }
    rec.ks_vs_zero_field = ks_two_weightings(vals, wa, wb);
  }

  // Moment residuals for uniformly permuted site tuples (ferro only).
  if (!params.staggered_m && !params.staggered_frame && budgets.pure_state_lmax > 0 &&
      budgets.site_tuples > 0) {
    rec.pure_state_residual.assign(budgets.pure_state_lmax, 0.0);
    const double tanh_x = std::tanh(rec.field_sum);
    std::vector<int> tuple(budgets.pure_state_lmax);
    for (int l = 1; l <= budgets.pure_state_lmax; ++l) {
      const int count = std::max(1, budgets.site_tuples);
      double acc = 0.0;
      for (int k = 0; k < count; ++k) {
        for (int j = 0; j < l; ++j) {
          bool fresh = true;
          do {
            tuple[j] = static_cast<int>(rng.next_below(nsites));
            fresh = true;
            for (int jj = 0; jj < j; ++jj)
              if (tuple[jj] == tuple[j]) fresh = false;
          } while (!fresh);
        }
        const double prod_mean = ctx.expect([&](int t) {
          const std::int8_t* row = archive.row(t);
          int p = 1;
          for (int j = 0; j < l; ++j) p *= row[tuple[j]];
          return static_cast<double>(p);
        });
        const double target = (l % 2 == 0) ? std::pow(q, l / 2.0)
                                           : std::pow(q, l / 2.0) * tanh_x;
        acc += std::abs(prod_mean - target);
      }
      rec.pure_state_residual[l - 1] = acc / count;
    }
  }

  rec.valid = true;
  return rec;
}

RsbStats rsb_stats(const DisorderSweep& sweep) {
  const auto recs = sweep.valid_records();
  if (recs.size() < 2) throw std::invalid_argument("rsb_stats: need at least 2 disorders");
  RsbStats st;
  MeanVar conc = collect(recs, [](const QuenchedRecord& r) { return r.r4c_mean; });
  st.concentration = conc.mean;
  st.concentration_se = conc.se();
  st.mean_mass_pos = collect(recs, [](const QuenchedRecord& r) { return r.mass_pos; }).mean;
  st.pooled_hist.fill(0.0);
  long near = 0;
  for (const QuenchedRecord* r : recs) {
    st.pooled_draws += r->overlap_draws;
    near += r->overlap_near_pm;
    for (int b = 0; b < kOverlapHistBins; ++b) st.pooled_hist[b] += r->overlap_hist[b];
  }
  st.frac_near_pm =
      st.pooled_draws > 0 ? static_cast<double>(near) / static_cast<double>(st.pooled_draws) : 0.0;
  return st;
}

NsaStats nsa_stats(const DisorderSweep& sweep, int min_disorders) {
  const auto recs = sweep.valid_records();
  if (static_cast<int>(recs.size()) < min_disorders)
    throw std::invalid_argument("nsa_stats: need at least " + std::to_string(min_disorders) +
                                " disorder realizations, have " + std::to_string(recs.size()));
  NsaStats st;
  MeanVar res;
  MeanVar cons;
  std::vector<double> values;
  values.reserve(recs.size());
  for (const QuenchedRecord* r : recs) {
    const double t = std::tanh(r->field_sum);
    const double pred = sweep.q_hat * t * t;
    res.add((r->r_mean - pred) * (r->r_mean - pred));
    cons.add(std::abs(r->mass_pos - 0.5 * (1.0 + t * t)));
    values.push_back(r->r_mean);
  }
  st.residual_sq_mean = res.mean;
  st.residual_sq_se = res.se();
  st.mass_consistency = cons.mean;
  const double a = std::sqrt(sweep.q_hat) * sweep.beta * sweep.h;
  st.ks_distance = ks_statistic(
      values, [&](double y) { return tanh_sq_law_cdf(y, sweep.q_hat, a); });
  return st;
}

UltraStats ultrametric_stats(const DisorderSweep& sweep, double mass_tol) {
  const auto recs = sweep.valid_records();
  if (recs.empty()) throw std::invalid_argument("ultrametric_stats: empty sweep");
  UltraStats st;
  st.mass_dev_tol = mass_tol;
  MeanVar viol, dev;
  long within = 0;
  for (const QuenchedRecord* r : recs) {
    viol.add(r->ultra_violation_rate);
    const double t = std::tanh(r->field_sum);
    const double a = 0.25 * (1.0 + 3.0 * t * t);
    const double b = 0.25 * (1.0 - t * t);
    double d = std::abs(r->mass_qqq - a);
    for (double mb : r->mass_mixed) d = std::max(d, std::abs(mb - b));
    dev.add(d);
    if (d <= mass_tol) ++within;
  }
  st.violation_rate = viol.mean;
  st.mass_dev_mean = dev.mean;
  st.mass_dev_max = 0.0;
  for (const QuenchedRecord* r : recs) {
    const double t = std::tanh(r->field_sum);
    const double a = 0.25 * (1.0 + 3.0 * t * t);
    const double b = 0.25 * (1.0 - t * t);
    double d = std::abs(r->mass_qqq - a);
    for (double mb : r->mass_mixed) d = std::max(d, std::abs(mb - b));
    st.mass_dev_max = std::max(st.mass_dev_max, d);
  }
  st.frac_disorders_within = static_cast<double>(within) / static_cast<double>(recs.size());
  return st;
}

GgResult gg_residual(const DisorderSweep& sweep, const GaussHermite& gh, int bootstrap_reps,
                     std::uint64_t bootstrap_seed, int min_disorders) {
  const auto recs = sweep.valid_records();
  if (static_cast<int>(recs.size()) < min_disorders)
    throw std::invalid_argument("gg_residual: need at least " + std::to_string(min_disorders) +
                                " disorder realizations");
  GgResult res;
  std::vector<double> rr(recs.size()), r1(recs.size()), r2(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    rr[i] = recs[i]->rr13_mean;
    r1[i] = recs[i]->r_mean;
    r2[i] = recs[i]->r2_mean;
  }
  auto statistic = [&](std::span<const int> idx) {
    double m_rr = 0, m_r1 = 0, m_r2 = 0;
    for (int i : idx) {
      m_rr += rr[i];
      m_r1 += r1[i];
      m_r2 += r2[i];
    }
    const double n = static_cast<double>(idx.size());
    m_rr /= n;
    m_r1 /= n;
    m_r2 /= n;
    return 2.0 * m_rr - m_r1 * m_r1 - m_r2;
  };
  std::vector<int> full(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) full[i] = static_cast<int>(i);
  res.statistic = statistic(full);

  RngStream rng(derive_key(bootstrap_seed, {rng_tag::kBootstrap}));
  const auto ci = bootstrap_ci(static_cast<int>(recs.size()), bootstrap_reps, 0.95, rng, statistic);
  res.ci_lo = ci.lo;
  res.ci_hi = ci.hi;

  const double a = std::sqrt(sweep.q_hat) * sweep.beta * sweep.h;
  const double e_tanh2 = gh.expect([&](double z) {
    const double t = std::tanh(a * z);
    return t * t;
  });
  res.predicted = -sweep.q_hat * sweep.q_hat * (1.0 - e_tanh2) * (1.0 - e_tanh2);
  return res;
}

MagStats magnetization_stats(const DisorderSweep& sweep) {
  const auto recs = sweep.valid_records();
  if (recs.empty()) throw std::invalid_argument("magnetization_stats: empty sweep");
  MagStats st;
  MeanVar msq, pred, site, rmm;
  const double sq = std::sqrt(sweep.q_hat);
  for (const QuenchedRecord* r : recs) {
    msq.add(r->msq_dev);
    const double d = r->m_mean - sq * std::tanh(r->field_sum);
    pred.add(d * d);
    site.add(r->site_uniformity);
    rmm.add(r->r_mm_dev);
  }
  st.msq_dev_mean = msq.mean;
  st.msq_dev_se = msq.se();
  st.pred_residual_mean = pred.mean;
  st.pred_residual_se = pred.se();
  st.site_uniformity_mean = site.mean;
  st.site_uniformity_se = site.se();
  st.r_mm_dev_mean = rmm.mean;
  st.r_mm_dev_se = rmm.se();
  return st;
}

PureStateStats pure_state_moment_test(const DisorderSweep& sweep, int l_max) {
  if (l_max > 6) throw std::invalid_argument("pure_state_moment_test: l_max capped at 6");
  const auto recs = sweep.valid_records();
  if (recs.empty()) throw std::invalid_argument("pure_state_moment_test: empty sweep");
  PureStateStats st;
  st.residual_mean.assign(l_max, 0.0);
  MeanVar mix;
  int counted = 0;
  for (const QuenchedRecord* r : recs) {
    if (static_cast<int>(r->pure_state_residual.size()) < l_max) continue;
    ++counted;
    for (int l = 0; l < l_max; ++l) st.residual_mean[l] += r->pure_state_residual[l];
    mix.add(std::abs(r->plus_state_weight - 0.5 * (1.0 + std::tanh(r->field_sum))));
  }
  if (counted == 0) throw std::invalid_argument("pure_state_moment_test: no residual records");
  for (double& v : st.residual_mean) v /= counted;
  st.mixture_diag = mix.mean;
  return st;
}

FreeEnergyVarStats free_energy_variance(const DisorderSweep& sweep) {
  const auto recs = sweep.valid_records();
  if (recs.size() < 2) throw std::invalid_argument("free_energy_variance: need >= 2 disorders");
  FreeEnergyVarStats st;
  MeanVar mv = collect(recs, [](const QuenchedRecord& r) { return r.log_mgf; });
  st.var = mv.var();
  st.var_se = st.var * std::sqrt(2.0 / static_cast<double>(mv.n - 1));
  st.bound = sweep.beta * sweep.beta * sweep.h * sweep.h;
  st.bound_applicable = sweep.kind == DisorderKind::Gaussian;
  return st;
}

OverlapFluctuationStats overlap_fluctuation(const DisorderSweep& sweep) {
  const auto recs = sweep.valid_records();
  if (recs.empty()) throw std::invalid_argument("overlap_fluctuation: empty sweep");
  OverlapFluctuationStats st;
  MeanVar mv = collect(recs, [](const QuenchedRecord& r) { return r.quenched_r_var; });
  st.value = mv.mean;
  st.se = mv.se();
  st.bound = sweep.h != 0.0 ? std::pow(2.0, 1.5) / (sweep.beta * std::abs(sweep.h)) : 0.0;
  return st;
}

SmallHCollapse small_h_collapse(const DisorderSweep& sweep) {
  const auto recs = sweep.valid_records();
  if (recs.empty()) throw std::invalid_argument("small_h_collapse: empty sweep");
  SmallHCollapse st;
  MeanVar mv = collect(recs, [](const QuenchedRecord& r) { return r.ks_vs_zero_field; });
  st.mean_ks = mv.mean;
  st.se = mv.se();
  return st;
}

double factorization_transfer(const DisorderSweep& sweep) {
  const auto recs = sweep.valid_records();
  if (recs.empty()) throw std::invalid_argument("factorization_transfer: empty sweep");
  return collect(recs, [](const QuenchedRecord& r) { return r.sign_agreement; }).mean;
}

CorrelationUniformity correlation_uniformity(const Lattice& lat, const SampleArchive& archive,
                                             double q_hat, double eps,
                                             const EstimatorBudgets& budgets, std::uint64_t key) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("correlation_uniformity: eps must be in (0,1)");
  const std::vector<int> window = interior_window(lat, eps);
  const double min_dist = eps * lat.radius();
  const int m = static_cast<int>(std::floor((1.0 - eps) * lat.radius()));
  if (2.0 * m * lat.dim() < min_dist)
    throw std::invalid_argument("correlation_uniformity: no admissible tuples for this eps");

  RngStream rng(derive_key(key, {rng_tag::kEstimator, 99}));
  const int nsamp = archive.size();
  auto l1 = [&](int a, int b) {
    auto xa = lat.coords_of(a);
    auto xb = lat.coords_of(b);
    int d = 0;
    for (int k = 0; k < lat.dim(); ++k) d += std::abs(xa[k] - xb[k]);
    return d;
  };
  auto corr2 = [&](int i, int j) {
    long acc = 0;
    for (int t = 0; t < nsamp; ++t) {
      const std::int8_t* row = archive.row(t);
      acc += row[i] * row[j];
    }
    return static_cast<double>(acc) / nsamp;
  };

  CorrelationUniformity out;
  MeanVar pair_dev, quad_dev;
  const int wsize = static_cast<int>(window.size());
  for (int k = 0; k < budgets.pairs; ++k) {
    int i = -1, j = -1;
    bool found = false;
    for (int tries = 0; tries < 1000; ++tries) {
      i = window[rng.next_below(wsize)];
      j = window[rng.next_below(wsize)];
      if (l1(i, j) >= min_dist) {
        found = true;
        break;
      }
    }
    if (!found) continue;
    const double dev = std::abs(corr2(i, j) - q_hat);
    pair_dev.add(dev);
    out.delta_hat = std::max(out.delta_hat, dev);
    ++out.pairs_used;
  }
  if (out.pairs_used == 0)
    throw std::invalid_argument("correlation_uniformity: no admissible pairs sampled");
  out.delta_mean = pair_dev.mean;
  out.pair_se = std::sqrt(std::max(0.0, 1.0 - q_hat * q_hat) / nsamp);

  for (int k = 0; k < budgets.quads; ++k) {
    int s[4];
    bool found = false;
    for (int tries = 0; tries < 1000 && !found; ++tries) {
      for (int& v : s) v = window[rng.next_below(wsize)];
      found = true;
      for (int a = 0; a < 4 && found; ++a)
        for (int b = a + 1; b < 4; ++b)
          if (l1(s[a], s[b]) < min_dist) {
            found = false;
            break;
          }
    }
    if (!found) continue;
    long acc = 0;
    for (int t = 0; t < nsamp; ++t) {
      const std::int8_t* row = archive.row(t);
      acc += row[s[0]] * row[s[1]] * row[s[2]] * row[s[3]];
    }
    const double val = static_cast<double>(acc) / nsamp;
    const double dev = std::abs(val - q_hat * q_hat);
    quad_dev.add(dev);
    out.gamma_hat = std::max(out.gamma_hat, dev);
    ++out.quads_used;
  }
  out.gamma_mean = quad_dev.mean;
  out.quad_se = std::sqrt(std::max(0.0, 1.0 - std::pow(q_hat, 4.0)) / nsamp);

  // Unwindowed even-moment residuals (i.i.d. uniform site tuples).
  const int nsites = lat.num_sites();
  for (int l : {2, 4}) {
    double acc_abs = 0.0;
    const int count = std::max(1, budgets.site_tuples);
    for (int k = 0; k < count; ++k) {
      int tup[4];
      for (int j = 0; j < l; ++j) tup[j] = static_cast<int>(rng.next_below(nsites));
      long acc = 0;
      for (int t = 0; t < nsamp; ++t) {
        const std::int8_t* row = archive.row(t);
        int p = 1;
        for (int j = 0; j < l; ++j) p *= row[tup[j]];
        acc += p;
      }
      acc_abs += std::abs(static_cast<double>(acc) / nsamp - std::pow(q_hat, l / 2.0));
    }
    (l == 2 ? out.even_l2_residual : out.even_l4_residual) = acc_abs / count;
  }
  return out;
}

MgfGapReport mgf_gap(const Lattice& lat, std::span<const double> coefficients, DisorderKind kind,
                     int n_draws, std::uint64_t seed, double c, double theta) {
  if (coefficients.size() != static_cast<std::size_t>(lat.num_sites()))
    throw std::invalid_argument("mgf_gap: one coefficient per site required");
  for (double a : coefficients)
    if (std::abs(a) > theta / 2.0)
      throw std::invalid_argument("mgf_gap: coefficient bound theta/2 exceeded");

  MgfGapReport rep;
  rep.c_used = c;
  const double n = static_cast<double>(lat.num_sites());
  double sum_a2 = 0.0, sum_a3 = 0.0;
  for (double a : coefficients) {
    sum_a2 += a * a;
    sum_a3 += std::abs(a) * std::abs(a) * std::abs(a);
  }
  rep.reference = std::exp(sum_a2 / (2.0 * n));
  rep.bound_candidate = sum_a3 / std::pow(n, 1.5);

  std::vector<double> draws(n_draws);
  for (int d = 0; d < n_draws; ++d) {
    const DisorderField f =
        sample_disorder(lat, kind, derive_key(seed, {rng_tag::kOracle, static_cast<std::uint64_t>(d)}));
    double s = 0.0;
    for (int i = 0; i < lat.num_sites(); ++i) s += coefficients[i] * f.values[i];
    draws[d] = std::exp(s / std::sqrt(n));
  }
  rep.empirical_mean = mean_of(draws);
  rep.empirical_se = batch_means_se(draws);
  rep.empirical_gap = std::abs(rep.empirical_mean - rep.reference);

  if (kind == DisorderKind::Gaussian) {
    rep.exact_gap = 0.0;  // the Gaussian MGF equals the reference identically
  } else {
    double log_prod = 0.0;
    for (double a : coefficients) log_prod += std::log(std::cosh(a / std::sqrt(n)));
    rep.exact_gap = std::abs(std::exp(log_prod) - rep.reference);
  }
  rep.violates = rep.exact_gap > c * rep.bound_candidate;
  return rep;
}

}  // namespace rfim
