#include "rfim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rfim/parallel.hpp"
#include "rfim/samplers.hpp"
#include "rfim/version.hpp"

namespace rfim {

using nlohmann::json;

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t disorder_seed_for(std::uint64_t master_seed, int index) {
  return derive_key(master_seed, {rng_tag::kDisorder, static_cast<std::uint64_t>(index)});
}

QhatResolved resolve_q_hat(const ExperimentConfig& cfg, int n) {
  QhatResolved out;
  switch (cfg.estimator.qhat.kind) {
    case QhatSource::Kind::Explicit:
      out.value = cfg.estimator.qhat.value;
      out.provenance = "explicit";
      return out;
    case QhatSource::Kind::Onsager: {
      if (cfg.model.d != 2)
        throw std::invalid_argument("q_hat: onsager source requires d = 2");
      const double sq = onsager_sqrt_q(cfg.model.beta);
      out.value = sq * sq;
      out.provenance = "onsager(beta=" + format_g17(cfg.model.beta) + ")";
      return out;
    }
    case QhatSource::Kind::FkEstimate: {
      const double p = beta_to_p(cfg.model.beta);
      SqrtQSchedule sched;
      const std::vector<int> ns = {n};
      const auto est = estimate_sqrt_q(cfg.model.d, p, ns, sched,
                                       derive_key(cfg.disorder.master_seed, {rng_tag::kFk}));
      out.value = est.back().p_hat * est.back().p_hat;
      out.provenance = "fk-estimate(n=" + std::to_string(n) +
                       ", samples=" + std::to_string(est.back().samples) + ")";
      return out;
    }
  }
  throw std::logic_error("q_hat: unreachable");
}

SampleArchive zero_field_stream(const Lattice& lat, double beta, const SamplerBlock& sampler,
                                std::uint64_t master_seed, int n) {
  ModelParams params{beta, 0.0, Interaction::Ferro};
  DisorderField none;
  none.lattice = &lat;
  none.kind = DisorderKind::Gaussian;
  none.seed = 0;
  none.values.assign(lat.num_sites(), 0.0);
  SampleSchedule schedule;
  schedule.burn_in_sweeps = sampler.burn_in_sweeps;
  schedule.thinning = sampler.thinning;
  schedule.samples = sampler.samples;
  schedule.update_kind = sampler.update_kind;
  return run_chain(lat, params, none, schedule,
                   derive_key(master_seed, {rng_tag::kChain, static_cast<std::uint64_t>(n)}));
}

DisorderSweep run_disorder_sweep(const Lattice& lat, const SampleArchive& zero_field,
                                 const SweepSpec& spec, const std::set<int>* skip,
                                 const std::function<void(const QuenchedRecord&)>& sink) {
  DisorderSweep sweep;
  sweep.d = lat.dim();
  sweep.n = spec.n;
  sweep.beta = spec.beta;
  sweep.h = spec.h;
  sweep.kind = spec.kind;
  sweep.interaction = spec.interaction;
  sweep.q_hat = spec.q_hat;
  sweep.q_hat_provenance = spec.q_hat_provenance;

  const int total = spec.realizations;
  std::vector<QuenchedRecord> records(total);
  std::vector<char> fresh(total, 0);
  const int chunk = std::max(1, spec.workers * 8);
  for (int base = 0; base < total; base += chunk) {
    const int end = std::min(total, base + chunk);
    parallel_for(base, end, spec.workers, [&](int idx) {
      if (skip && skip->count(idx)) return;
      const std::uint64_t seed = disorder_seed_for(spec.master_seed, idx);
      DisorderField field = sample_disorder(lat, spec.kind, seed);
      RecordParams rp;
      rp.beta = spec.beta;
      rp.h = spec.h;
      rp.weight_h = spec.h;
      rp.q_hat = spec.q_hat;
      if (spec.interaction == Interaction::Antiferro) {
        field = gauge_flip_field(field);
        rp.staggered_m = true;  // physical antiferro m is the staggered column
      }
      const std::uint64_t ekey =
          derive_key(spec.master_seed,
                     {rng_tag::kEstimator, static_cast<std::uint64_t>(spec.n),
                      static_cast<std::uint64_t>(idx),
                      spec.interaction == Interaction::Ferro ? 0ULL : 1ULL});
      QuenchedRecord rec = compute_quenched_record(lat, zero_field, field, rp, spec.budgets, ekey);
      rec.disorder_index = idx;
      rec.disorder_seed = seed;
      records[idx] = std::move(rec);
      fresh[idx] = 1;
    });
    if (sink)
      for (int idx = base; idx < end; ++idx)
        if (fresh[idx]) sink(records[idx]);
  }
  for (int idx = 0; idx < total; ++idx)
    if (fresh[idx]) sweep.records.push_back(std::move(records[idx]));
  return sweep;
}

DisorderSweep run_direct_sweep(const Lattice& lat, const SweepSpec& spec,
                               const SampleSchedule& schedule) {
  DisorderSweep sweep;
  sweep.d = lat.dim();
  sweep.n = spec.n;
  sweep.beta = spec.beta;
  sweep.h = spec.h;
  sweep.kind = spec.kind;
  sweep.interaction = spec.interaction;
  sweep.q_hat = spec.q_hat;
  sweep.q_hat_provenance = spec.q_hat_provenance;

  std::vector<QuenchedRecord> records(spec.realizations);
  parallel_for(0, spec.realizations, spec.workers, [&](int idx) {
    const std::uint64_t seed = disorder_seed_for(spec.master_seed, idx);
    const DisorderField field = sample_disorder(lat, spec.kind, seed);
    ModelParams params{spec.beta, spec.h, spec.interaction};
    const SampleArchive archive =
        run_chain(lat, params, field, schedule,
                  derive_key(spec.master_seed, {rng_tag::kChain, static_cast<std::uint64_t>(spec.n),
                                                static_cast<std::uint64_t>(idx)}));
    RecordParams rp;
    rp.beta = spec.beta;
    rp.h = spec.h;
    rp.weight_h = 0.0;  // samples already target the field model
    rp.q_hat = spec.q_hat;
    if (spec.interaction == Interaction::Antiferro) rp.staggered_frame = true;
    const DisorderField* sum_field = &field;
    DisorderField flipped;
    if (spec.interaction == Interaction::Antiferro) {
      flipped = gauge_flip_field(field);
      sum_field = &flipped;
    }
    const std::uint64_t ekey = derive_key(
        spec.master_seed, {rng_tag::kEstimator, static_cast<std::uint64_t>(spec.n),
                           static_cast<std::uint64_t>(idx), 2ULL});
    QuenchedRecord rec = compute_quenched_record(lat, archive, *sum_field, rp, spec.budgets, ekey);
    rec.disorder_index = idx;
    rec.disorder_seed = seed;
    records[idx] = std::move(rec);
  });
  sweep.records = std::move(records);
  return sweep;
}

namespace {

struct NamedValue {
  const char* name;
  double value;
  double se;
};

std::vector<NamedValue> record_scalars(const QuenchedRecord& r) {
  std::vector<NamedValue> v = {
      {"valid", r.valid ? 1.0 : 0.0, 0.0},
      {"field_sum", r.field_sum, 0.0},
      {"ess", r.ess, 0.0},
      {"log_mgf", r.log_mgf, 0.0},
      {"mean_weight", r.mean_weight, r.mean_weight_se},
      {"jensen_ok", r.jensen_ok ? 1.0 : 0.0, 0.0},
      {"m_mean", r.m_mean, 0.0},
      {"m_abs_mean", r.m_abs_mean, 0.0},
      {"m2_mean", r.m2_mean, 0.0},
      {"msq_dev", r.msq_dev, 0.0},
      {"site_uniformity", r.site_uniformity, 0.0},
      {"plus_state_weight", r.plus_state_weight, 0.0},
      {"r_mean", r.r_mean, 0.0},
      {"r_mean_budget", r.r_mean_budget, 0.0},
      {"r2_mean", r.r2_mean, 0.0},
      {"r4c_mean", r.r4c_mean, 0.0},
      {"rr13_mean", r.rr13_mean, 0.0},
      {"r_mm_dev", r.r_mm_dev, 0.0},
      {"ultra_violation_rate", r.ultra_violation_rate, 0.0},
      {"mass_qqq", r.mass_qqq, 0.0},
      {"mass_mixed_0", r.mass_mixed[0], 0.0},
      {"mass_mixed_1", r.mass_mixed[1], 0.0},
      {"mass_mixed_2", r.mass_mixed[2], 0.0},
      {"mass_unclassified", r.mass_unclassified, 0.0},
      {"class_window", r.class_window, 0.0},
      {"mass_pos", r.mass_pos, 0.0},
      {"sign_agreement", r.sign_agreement, 0.0},
      {"overlap_draws", static_cast<double>(r.overlap_draws), 0.0},
      {"overlap_near_pm", static_cast<double>(r.overlap_near_pm), 0.0},
      {"ks_vs_zero_field", r.ks_vs_zero_field, 0.0},
      {"quenched_r_var", r.quenched_r_var, 0.0},
  };
  return v;
}

}  // namespace

std::vector<std::string> record_rows(const QuenchedRecord& rec) {
  std::vector<std::string> rows;
  auto push = [&](const std::string& stat, double value, double se) {
    std::string row = std::to_string(rec.disorder_index) + ',' + std::to_string(rec.disorder_seed) +
                      ',' + stat + ',' + format_g17(value) + ',';
    if (se != 0.0) row += format_g17(se);
    rows.push_back(std::move(row));
  };
  if (!rec.valid) {
    push("valid", 0.0, 0.0);
    return rows;
  }
  for (const auto& nv : record_scalars(rec)) push(nv.name, nv.value, nv.se);
  for (std::size_t l = 0; l < rec.pure_state_residual.size(); ++l)
    push("pure_state_residual_l" + std::to_string(l + 1), rec.pure_state_residual[l], 0.0);
  return rows;
}

std::vector<QuenchedRecord> records_from_csv(const std::vector<std::string>& lines) {
  std::map<int, QuenchedRecord> by_index;
  for (const std::string& line : lines) {
    if (line.empty() || line.rfind("disorder_index", 0) == 0) continue;
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    const int idx = std::stoi(tok);
    std::getline(ss, tok, ',');
    const std::uint64_t seed = std::stoull(tok);
    std::string stat;
    std::getline(ss, stat, ',');
    std::getline(ss, tok, ',');
    const double value = std::stod(tok);
    QuenchedRecord& r = by_index[idx];
    r.disorder_index = idx;
    r.disorder_seed = seed;
    if (stat == "valid") r.valid = value != 0.0;
    else if (stat == "field_sum") r.field_sum = value;
    else if (stat == "ess") r.ess = value;
    else if (stat == "log_mgf") r.log_mgf = value;
    else if (stat == "mean_weight") r.mean_weight = value;
    else if (stat == "jensen_ok") r.jensen_ok = value != 0.0;
    else if (stat == "m_mean") r.m_mean = value;
    else if (stat == "m_abs_mean") r.m_abs_mean = value;
    else if (stat == "m2_mean") r.m2_mean = value;
    else if (stat == "msq_dev") r.msq_dev = value;
    else if (stat == "site_uniformity") r.site_uniformity = value;
    else if (stat == "plus_state_weight") r.plus_state_weight = value;
    else if (stat == "r_mean") r.r_mean = value;
    else if (stat == "r_mean_budget") r.r_mean_budget = value;
    else if (stat == "r2_mean") r.r2_mean = value;
    else if (stat == "r4c_mean") r.r4c_mean = value;
    else if (stat == "rr13_mean") r.rr13_mean = value;
    else if (stat == "r_mm_dev") r.r_mm_dev = value;
    else if (stat == "ultra_violation_rate") r.ultra_violation_rate = value;
    else if (stat == "mass_qqq") r.mass_qqq = value;
    else if (stat == "mass_mixed_0") r.mass_mixed[0] = value;
    else if (stat == "mass_mixed_1") r.mass_mixed[1] = value;
    else if (stat == "mass_mixed_2") r.mass_mixed[2] = value;
    else if (stat == "mass_unclassified") r.mass_unclassified = value;
    else if (stat == "class_window") r.class_window = value;
    else if (stat == "mass_pos") r.mass_pos = value;
    else if (stat == "sign_agreement") r.sign_agreement = value;
    else if (stat == "overlap_draws") r.overlap_draws = static_cast<long>(value);
    else if (stat == "overlap_near_pm") r.overlap_near_pm = static_cast<long>(value);
    else if (stat == "ks_vs_zero_field") r.ks_vs_zero_field = value;
    else if (stat == "quenched_r_var") r.quenched_r_var = value;
    else if (stat.rfind("pure_state_residual_l", 0) == 0) {
      const int l = std::stoi(stat.substr(21));
      if (static_cast<int>(r.pure_state_residual.size()) < l) r.pure_state_residual.resize(l);
      r.pure_state_residual[l - 1] = value;
    }
  }
  std::vector<QuenchedRecord> out;
  out.reserve(by_index.size());
  for (auto& [idx, rec] : by_index) out.push_back(std::move(rec));
  return out;
}

namespace {

struct ThresholdSpec {
  bool has_max = false, has_min = false;
  double max = 0, min = 0;
};

std::map<std::string, ThresholdSpec> load_simulate_thresholds(const std::string& file) {
  std::map<std::string, ThresholdSpec> out;
  if (file.empty()) return out;
  std::ifstream is(file);
  if (!is) throw std::runtime_error("thresholds: cannot open " + file);
  json j;
  is >> j;
  if (!j.contains("simulate")) return out;
  for (auto it = j["simulate"].begin(); it != j["simulate"].end(); ++it) {
    ThresholdSpec spec;
    if (it.value().contains("max")) {
      spec.has_max = true;
      spec.max = it.value()["max"].get<double>();
    }
    if (it.value().contains("min")) {
      spec.has_min = true;
      spec.min = it.value()["min"].get<double>();
    }
    out[it.key()] = spec;
  }
  return out;
}

json summary_entry(const std::string& name, double value, double se,
                   const std::map<std::string, ThresholdSpec>& thresholds, int* failures,
                   std::optional<double> prediction = std::nullopt) {
  json e;
  e["statistic"] = name;
  e["value"] = value;
  e["stderr"] = se;
  if (prediction) e["prediction"] = *prediction;
  const auto it = thresholds.find(name);
  if (it != thresholds.end()) {
    bool pass = true;
    if (it->second.has_max) {
      e["threshold_max"] = it->second.max;
      pass = pass && value <= it->second.max;
    }
    if (it->second.has_min) {
      e["threshold_min"] = it->second.min;
      pass = pass && value >= it->second.min;
    }
    e["pass"] = pass;
    if (!pass && failures) ++(*failures);
  }
  return e;
}

bool wants(const ExperimentConfig& cfg, const std::string& stat) {
  if (cfg.estimator.statistics.empty()) return true;
  return std::find(cfg.estimator.statistics.begin(), cfg.estimator.statistics.end(), stat) !=
         cfg.estimator.statistics.end();
}

std::string interaction_tag(Interaction i) { return i == Interaction::Ferro ? "ferro" : "antiferro"; }

}  // namespace

int run_experiment(const ExperimentConfig& cfg, ResultStore& store, const RunLimits& limits) {
  cfg.validate();
  const std::string hash = cfg.hash_hex();
  const auto thresholds = load_simulate_thresholds(cfg.estimator.thresholds_file);
  const bool want_spool =
      std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "spool") !=
      cfg.output.formats.end();
  int failures = 0;

  for (int n : cfg.model.n_list) {
    const Lattice lat = Lattice::build(cfg.model.d, n);
    const double h = cfg.model.h.value_at(n);
    const QhatResolved qhat = resolve_q_hat(cfg, n);
    SampleArchive zero_field =
        zero_field_stream(lat, cfg.model.beta, cfg.sampler, cfg.disorder.master_seed, n);
    const double autocorr = zero_field.lag1_autocorr_m2();

    const std::string tag = interaction_tag(cfg.model.interaction) + "_n" + std::to_string(n);
    if (want_spool) {
      json side;
      side["config_hash"] = hash;
      side["code_version"] = kCodeVersion;
      side["d"] = cfg.model.d;
      side["n"] = n;
      side["beta"] = cfg.model.beta;
      side["h"] = h;
      side["interaction"] = interaction_tag(cfg.model.interaction);
      side["distribution"] = to_string(cfg.disorder.distribution);
      side["master_seed"] = cfg.disorder.master_seed;
      side["sampler"] = {{"update_kind", to_string(cfg.sampler.update_kind)},
                         {"burn_in_sweeps", cfg.sampler.burn_in_sweeps},
                         {"thinning", cfg.sampler.thinning},
                         {"samples", cfg.sampler.samples}};
      side["lag1_autocorr_m2"] = autocorr;
      zero_field.save(store.path("spool_n" + std::to_string(n) + ".bin"), side.dump(2));
      store.register_artifact("spool_n" + std::to_string(n) + ".bin");
      store.register_artifact("spool_n" + std::to_string(n) + ".bin.json");
    }

    const std::string scope = hash + ":" + tag;
    const std::set<int> done = store.completed(scope);
    const std::string records_file = "records_" + tag + ".csv";
    const std::string overlaps_file = "overlaps_" + tag + ".csv";

    SweepSpec spec;
    spec.n = n;
    spec.beta = cfg.model.beta;
    spec.h = h;
    spec.kind = cfg.disorder.distribution;
    spec.interaction = cfg.model.interaction;
    spec.realizations = cfg.disorder.realizations;
    if (limits.max_disorders >= 0)
      spec.realizations = std::min(spec.realizations, limits.max_disorders);
    spec.master_seed = cfg.disorder.master_seed;
    spec.budgets = cfg.estimator.budgets;
    spec.q_hat = qhat.value;
    spec.q_hat_provenance = qhat.provenance;
    spec.workers = cfg.workers;

    auto sink = [&](const QuenchedRecord& rec) {
      store.append_rows(records_file, record_rows(rec));
      std::vector<std::string> orows;
      for (const auto& t : rec.stored_triples)
        orows.push_back(std::to_string(rec.disorder_index) + ',' + std::to_string(rec.disorder_seed) +
                        ",triple," + format_g17(t[0]) + "|" + format_g17(t[1]) + "|" +
                        format_g17(t[2]) + ',');
      if (!orows.empty()) store.append_rows(overlaps_file, orows);
      store.mark_completed(scope, rec.disorder_index);
    };

    DisorderSweep sweep = run_disorder_sweep(lat, zero_field, spec, &done, sink);

    // Merge back previously completed records for aggregation.
    if (!done.empty() && store.exists(records_file)) {
      auto prior = records_from_csv(store.read_lines(records_file));
      std::set<int> have;
      for (const auto& r : sweep.records) have.insert(r.disorder_index);
      for (auto& r : prior)
        if (!have.count(r.disorder_index) && r.disorder_index < spec.realizations)
          sweep.records.push_back(std::move(r));
      std::sort(sweep.records.begin(), sweep.records.end(),
                [](const QuenchedRecord& a, const QuenchedRecord& b) {
                  return a.disorder_index < b.disorder_index;
                });
    }

    // Sweep summary.
    json summary;
    summary["schema_version"] = 1;
    summary["config_hash"] = hash;
    summary["code_version"] = kCodeVersion;
    summary["n"] = n;
    summary["beta"] = cfg.model.beta;
    summary["h"] = h;
    summary["interaction"] = interaction_tag(cfg.model.interaction);
    summary["q_hat"] = qhat.value;
    summary["q_hat_provenance"] = qhat.provenance;
    summary["records"] = static_cast<int>(sweep.records.size());
    summary["zero_field_lag1_autocorr_m2"] = autocorr;
    summary["schedule_autocorr_ok"] = std::abs(autocorr) <= 0.05;
    json entries = json::array();
    auto guarded = [&](const std::string& name, const std::function<void()>& fn) {
      if (!wants(cfg, name)) return;
      try {
        fn();
      } catch (const std::exception& e) {
        json err;
        err["statistic"] = name;
        err["error"] = e.what();
        entries.push_back(err);
      }
    };

    guarded("rsb", [&] {
      const RsbStats st = rsb_stats(sweep);
      entries.push_back(summary_entry("rsb.concentration", st.concentration, st.concentration_se,
                                      thresholds, &failures));
      entries.push_back(
          summary_entry("rsb.frac_near_pm", st.frac_near_pm, 0.0, thresholds, &failures));
      entries.push_back(
          summary_entry("rsb.mean_mass_pos", st.mean_mass_pos, 0.0, thresholds, &failures));
    });
    guarded("nsa", [&] {
      const NsaStats st = nsa_stats(sweep);
      entries.push_back(summary_entry("nsa.residual_sq", st.residual_sq_mean, st.residual_sq_se,
                                      thresholds, &failures));
      entries.push_back(summary_entry("nsa.ks", st.ks_distance, 0.0, thresholds, &failures));
      entries.push_back(
          summary_entry("nsa.mass_consistency", st.mass_consistency, 0.0, thresholds, &failures));
    });
    guarded("ultrametric", [&] {
      const UltraStats st = ultrametric_stats(sweep);
      entries.push_back(
          summary_entry("ultra.violation_rate", st.violation_rate, 0.0, thresholds, &failures));
      entries.push_back(
          summary_entry("ultra.mass_dev_mean", st.mass_dev_mean, 0.0, thresholds, &failures));
      entries.push_back(
          summary_entry("ultra.mass_dev_max", st.mass_dev_max, 0.0, thresholds, &failures));
    });
    guarded("gg", [&] {
      const GaussHermite gh = GaussHermite::make(64);
      const GgResult st = gg_residual(sweep, gh, 2000, cfg.disorder.master_seed);
      json e = summary_entry("gg.statistic", st.statistic, 0.0, thresholds, &failures,
                             st.predicted);
      e["ci_lo"] = st.ci_lo;
      e["ci_hi"] = st.ci_hi;
      entries.push_back(e);
    });
    guarded("magnetization", [&] {
      const MagStats st = magnetization_stats(sweep);
      entries.push_back(
          summary_entry("mag.msq_dev", st.msq_dev_mean, st.msq_dev_se, thresholds, &failures));
      entries.push_back(summary_entry("mag.pred_residual", st.pred_residual_mean,
                                      st.pred_residual_se, thresholds, &failures));
      entries.push_back(summary_entry("mag.site_uniformity", st.site_uniformity_mean,
                                      st.site_uniformity_se, thresholds, &failures));
      entries.push_back(
          summary_entry("mag.r_mm_dev", st.r_mm_dev_mean, st.r_mm_dev_se, thresholds, &failures));
    });
    guarded("pure_state", [&] {
      const PureStateStats st =
          pure_state_moment_test(sweep, cfg.estimator.budgets.pure_state_lmax);
      for (std::size_t l = 0; l < st.residual_mean.size(); ++l)
        entries.push_back(summary_entry("pure_state.residual_l" + std::to_string(l + 1),
                                        st.residual_mean[l], 0.0, thresholds, &failures));
      entries.push_back(
          summary_entry("pure_state.mixture_diag", st.mixture_diag, 0.0, thresholds, &failures));
    });
    guarded("free_energy_variance", [&] {
      const FreeEnergyVarStats st = free_energy_variance(sweep);
      json e = summary_entry("free_energy.var", st.var, st.var_se, thresholds, &failures);
      e["bound"] = st.bound;
      e["bound_applicable"] = st.bound_applicable;
      if (st.bound_applicable && st.var > st.bound) {
        e["pass"] = false;
        ++failures;
      }
      entries.push_back(e);
    });
    guarded("small_h_collapse", [&] {
      const SmallHCollapse st = small_h_collapse(sweep);
      entries.push_back(
          summary_entry("small_h.mean_ks", st.mean_ks, st.se, thresholds, &failures));
    });
    guarded("correlation_uniformity", [&] {
      const CorrelationUniformity st = correlation_uniformity(
          lat, zero_field, qhat.value, cfg.estimator.eps, cfg.estimator.budgets,
          derive_key(cfg.disorder.master_seed, {rng_tag::kEstimator, static_cast<std::uint64_t>(n)}));
      entries.push_back(summary_entry("corr.delta_hat", st.delta_hat, st.pair_se, thresholds,
                                      &failures));
      entries.push_back(summary_entry("corr.gamma_hat", st.gamma_hat, st.quad_se, thresholds,
                                      &failures));
      entries.push_back(
          summary_entry("corr.even_l2_residual", st.even_l2_residual, 0.0, thresholds, &failures));
      entries.push_back(
          summary_entry("corr.even_l4_residual", st.even_l4_residual, 0.0, thresholds, &failures));
    });

    summary["entries"] = entries;
    store.write_text("summary_" + tag + ".json", summary.dump(2));
  }

  store.append_ledger("simulate", hash, store.artifacts());
  return failures;
}

EnumerateCheckReport enumerate_check(const ExperimentConfig& cfg) {
  EnumerateCheckReport report;
  const int n = cfg.model.n_list.front();
  const Lattice lat = Lattice::build(cfg.model.d, n);
  if (lat.num_sites() > kEnumerationSiteCap)
    throw std::invalid_argument("enumerate_check: lattice exceeds the enumeration cap");
  const double h = cfg.model.h.value_at(n);
  const ModelParams params{cfg.model.beta, h, cfg.model.interaction};
  const DisorderField field =
      sample_disorder(lat, cfg.disorder.distribution, disorder_seed_for(cfg.disorder.master_seed, 0));

  EnumerationOptions opt;
  opt.pair_means = true;
  const EnumerationResult exact = exact_enumerate(params, field, opt);

  auto add_row = [&](const std::string& name, double mc, double ex, double se, double tol_z) {
    EnumerateCheckRow row;
    row.name = name;
    row.mc = mc;
    row.exact = ex;
    row.se = se;
    row.z = se > 0 ? std::abs(mc - ex) / se : (mc == ex ? 0.0 : 1e300);
    row.pass = se > 0 ? row.z <= tol_z : std::abs(mc - ex) <= 1e-12;
    report.rows.push_back(row);
    report.all_pass = report.all_pass && row.pass;
  };

  // Monte Carlo comparison for both samplers.
  for (UpdateKind kind : {UpdateKind::Metropolis, UpdateKind::Cluster}) {
    SampleSchedule sched;
    sched.update_kind = kind;
    sched.burn_in_sweeps = 2000;
    sched.thinning = 2;
    sched.samples = std::max(1000, cfg.sampler.samples);
    const SampleArchive archive =
        run_chain(lat, params, field, sched,
                  derive_key(cfg.disorder.master_seed,
                             {rng_tag::kChain, static_cast<std::uint64_t>(n),
                              kind == UpdateKind::Metropolis ? 10ULL : 11ULL}));
    const int nsamp = archive.size();
    std::vector<double> series(nsamp);
    for (int i = 0; i < lat.num_sites(); ++i) {
      for (int t = 0; t < nsamp; ++t) series[t] = archive.row(t)[i];
      double mean = 0;
      for (double v : series) mean += v;
      mean /= nsamp;
      add_row(to_string(kind) + ":site" + std::to_string(i), mean, exact.site_mean[i],
              std::max(1e-9, batch_means_se(series)), 3.0);
    }
    for (int e = 0; e < lat.num_edges(); ++e) {
      const int u = lat.edge_u(e), v = lat.edge_v(e);
      for (int t = 0; t < nsamp; ++t)
        series[t] = static_cast<double>(archive.row(t)[u]) * archive.row(t)[v];
      double mean = 0;
      for (double val : series) mean += val;
      mean /= nsamp;
      add_row(to_string(kind) + ":edge" + std::to_string(e), mean, exact.pair(u, v),
              std::max(1e-9, batch_means_se(series)), 3.0);
    }
  }

  // Reweighting identity at enumeration scale (exact, no sampling).
  if (params.interaction == Interaction::Ferro) {
    const ModelParams zero{cfg.model.beta, 0.0, Interaction::Ferro};
    auto logw = [&](const SpinConfig& c) { return field_log_weight(c, field, cfg.model.beta, h); };
    const double denom = exact_expectation(zero, field, [&](const SpinConfig& c) {
      return std::exp(logw(c));
    });
    auto rew = [&](const std::function<double(const SpinConfig&)>& f) {
      return exact_expectation(zero, field,
                               [&](const SpinConfig& c) { return f(c) * std::exp(logw(c)); }) /
             denom;
    };
    add_row("reweight:m", rew([](const SpinConfig& c) { return magnetization(c); }), exact.m_mean,
            0.0, 0.0);
    add_row("reweight:m2",
            rew([](const SpinConfig& c) {
              const double m = magnetization(c);
              return m * m;
            }),
            exact.m2_mean, 0.0, 0.0);
  }

  // Single-spin closed form.
  if (n == 0) {
    add_row("closed_form:tanh", exact.site_mean[0],
            std::tanh(cfg.model.beta * h * field.values[0]), 0.0, 0.0);
  }
  return report;
}

int run_estimate_q(const ExperimentConfig& cfg, ResultStore& store) {
  const double p = beta_to_p(cfg.model.beta);
  SqrtQSchedule sched;
  sched.samples = std::max(2000, cfg.sampler.samples);
  sched.burn_in = cfg.sampler.burn_in_sweeps;
  sched.thinning = std::max(1, cfg.sampler.thinning / 2);
  const auto est = estimate_sqrt_q(cfg.model.d, p, cfg.model.n_list, sched,
                                   derive_key(cfg.disorder.master_seed, {rng_tag::kFk}));
  std::vector<std::string> rows;
  for (const auto& e : est) {
    rows.push_back(std::to_string(e.n) + ',' + format_g17(p) + ",free,origin-to-boundary," +
                   format_g17(e.p_hat) + ',' + format_g17(e.se) + ',' +
                   std::to_string(e.samples));
  }
  store.append_rows("estimate_q.csv", rows, "n,p,bc,pair,estimate,stderr,samples");
  json j;
  j["p"] = p;
  j["beta"] = cfg.model.beta;
  j["d"] = cfg.model.d;
  const double q_hat = est.back().p_hat * est.back().p_hat;
  j["q_hat"] = q_hat;
  j["q_hat_provenance"] = "fk-estimate(n=" + std::to_string(est.back().n) + ")";
  if (cfg.model.d == 2 && cfg.model.beta > beta_critical_2d()) {
    const double sq = onsager_sqrt_q(cfg.model.beta);
    j["onsager_q"] = sq * sq;
  }
  store.write_text("estimate_q.json", j.dump(2));
  store.append_ledger("estimate-q", cfg.hash_hex(), store.artifacts());
  return 0;
}

int run_analyze(const ExperimentConfig& cfg, ResultStore& store) {
  // Recompute statistics from spools: rebuild each zero-field stream from disk
  // and rerun the estimator pipeline with the same derived keys.
  int failures = 0;
  for (int n : cfg.model.n_list) {
    const std::string spool = store.path("spool_n" + std::to_string(n) + ".bin");
    SampleArchive zero_field = SampleArchive::load(spool);
    const Lattice lat = Lattice::build(cfg.model.d, n);
    const double h = cfg.model.h.value_at(n);
    const QhatResolved qhat = resolve_q_hat(cfg, n);
    SweepSpec spec;
    spec.n = n;
    spec.beta = cfg.model.beta;
    spec.h = h;
    spec.kind = cfg.disorder.distribution;
    spec.interaction = cfg.model.interaction;
    spec.realizations = cfg.disorder.realizations;
    spec.master_seed = cfg.disorder.master_seed;
    spec.budgets = cfg.estimator.budgets;
    spec.q_hat = qhat.value;
    spec.q_hat_provenance = qhat.provenance;
    spec.workers = cfg.workers;
    const std::string tag = interaction_tag(cfg.model.interaction) + "_n" + std::to_string(n);
    const std::string file = "records_" + tag + "_analyze.csv";
    run_disorder_sweep(lat, zero_field, spec, nullptr, [&](const QuenchedRecord& rec) {
      store.append_rows(file, record_rows(rec));
    });
  }
  store.append_ledger("analyze", cfg.hash_hex(), store.artifacts());
  return failures;
}

int emit_plot_data(ResultStore& store, const std::string& kind, const ExperimentConfig& cfg) {
  const std::string tag = interaction_tag(cfg.model.interaction);
  auto require = [&](const std::string& file) {
    if (!store.exists(file))
      throw std::runtime_error("plot-data: missing statistic source " + file);
  };
  if (kind == "overlap-hist") {
    for (int n : cfg.model.n_list) {
      const std::string src = "overlaps_" + tag + "_n" + std::to_string(n) + ".csv";
      require(src);
      Histogram hist(-1.0, 1.0, kOverlapHistBins);
      for (const std::string& line : store.read_lines(src)) {
        if (line.empty() || line.rfind("disorder_index", 0) == 0) continue;
        const auto p1 = line.find(",triple,");
        if (p1 == std::string::npos) continue;
        std::string vals = line.substr(p1 + 8);
        if (!vals.empty() && vals.back() == ',') vals.pop_back();
        std::stringstream ss(vals);
        std::string tok;
        while (std::getline(ss, tok, '|')) hist.add(std::stod(tok));
      }
      std::vector<std::string> rows;
      for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        const double lo = -1.0 + 2.0 * b / hist.counts.size();
        const double hi = -1.0 + 2.0 * (b + 1) / hist.counts.size();
        rows.push_back(std::to_string(n) + ",0,hist_bin," + format_g17(lo) + "|" + format_g17(hi) +
                       "|" + format_g17(hist.counts[b]) + ",");
      }
      store.append_rows("plot_overlap_hist_n" + std::to_string(n) + ".csv", rows);
    }
    return 0;
  }
  if (kind == "nsa-scatter") {
    for (int n : cfg.model.n_list) {
      const std::string src = "records_" + tag + "_n" + std::to_string(n) + ".csv";
      require(src);
      const auto records = records_from_csv(store.read_lines(src));
      const QhatResolved qhat = resolve_q_hat(cfg, n);
      std::vector<std::string> rows;
      for (const auto& r : records) {
        if (!r.valid) continue;
        const double t = std::tanh(r.field_sum);
        rows.push_back(std::to_string(r.disorder_index) + ',' + std::to_string(r.disorder_seed) +
                       ",nsa_scatter," + format_g17(r.field_sum) + "|" + format_g17(r.r_mean) +
                       "|" + format_g17(qhat.value * t * t) + ",");
      }
      store.append_rows("plot_nsa_scatter_n" + std::to_string(n) + ".csv", rows);
    }
    return 0;
  }
  if (kind == "triple-support") {
    for (int n : cfg.model.n_list) {
      const std::string src = "overlaps_" + tag + "_n" + std::to_string(n) + ".csv";
      require(src);
      std::vector<std::string> rows;
      for (const std::string& line : store.read_lines(src)) {
        if (line.empty() || line.rfind("disorder_index", 0) == 0) continue;
        rows.push_back(line);
      }
      store.append_rows("plot_triple_support_n" + std::to_string(n) + ".csv", rows);
    }
    return 0;
  }
  if (kind == "trend") {
    std::vector<std::string> rows;
    for (int n : cfg.model.n_list) {
      const std::string src = "summary_" + tag + "_n" + std::to_string(n) + ".json";
      require(src);
      std::ifstream is(store.path(src));
      json j;
      is >> j;
      for (const auto& e : j["entries"]) {
        if (!e.contains("value")) continue;
        rows.push_back(std::to_string(n) + ",0," + e["statistic"].get<std::string>() + ',' +
                       format_g17(e["value"].get<double>()) + ',' +
                       format_g17(e.value("stderr", 0.0)));
      }
    }
    store.append_rows("plot_trend.csv", rows);
    return 0;
  }
  throw std::runtime_error("plot-data: unknown figure kind '" + kind + "'");
}

}  // namespace rfim
