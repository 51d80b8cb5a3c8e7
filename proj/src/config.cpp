#include "rfim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rfim {

using nlohmann::json;

double HRule::value_at(int n) const {
  if (kind == Kind::Constant) return c;
  return c * std::pow(static_cast<double>(n), a);
}

const std::vector<std::string>& known_statistics() {
  static const std::vector<std::string> names = {
      "rsb", "nsa", "ultrametric", "gg", "magnetization", "pure_state",
      "free_energy_variance", "correlation_uniformity", "small_h_collapse"};
  return names;
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

HRule parse_h_rule(const json& j) {
  HRule rule;
  if (j.is_number()) {
    rule.kind = HRule::Kind::Constant;
    rule.c = j.get<double>();
    return rule;
  }
  reject_unknown_keys(j, {"kind", "c", "a"}, "model.h");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    rule.kind = HRule::Kind::Constant;
    rule.c = j.at("c").get<double>();
  } else if (kind == "power") {
    rule.kind = HRule::Kind::Power;
    rule.c = j.at("c").get<double>();
    rule.a = j.at("a").get<double>();
  } else {
    throw std::invalid_argument("config: h rule kind must be constant|power");
  }
  return rule;
}

json h_rule_json(const HRule& rule) {
  json j;
  j["kind"] = rule.kind == HRule::Kind::Constant ? "constant" : "power";
  j["c"] = rule.c;
  if (rule.kind == HRule::Kind::Power) j["a"] = rule.a;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version");
  if (model.d < 2) throw std::invalid_argument("config: model.d must be >= 2");
  if (model.n_list.empty()) throw std::invalid_argument("config: model.n_list must be nonempty");
  for (int n : model.n_list)
    if (n < 0) throw std::invalid_argument("config: model.n entries must be >= 0");
  if (!(model.beta > 0)) throw std::invalid_argument("config: model.beta must be > 0");
  if (disorder.realizations < 0)
    throw std::invalid_argument("config: disorder.realizations must be >= 0");
  if (sampler.thinning < 1) throw std::invalid_argument("config: sampler.thinning must be >= 1");
  if (sampler.burn_in_sweeps < 0 || sampler.samples < 0)
    throw std::invalid_argument("config: sampler counts must be >= 0");
  if (estimator.qhat.kind == QhatSource::Kind::Explicit &&
      !(estimator.qhat.value > 0 && estimator.qhat.value <= 1))
    throw std::invalid_argument("config: explicit q_hat must be in (0,1]");
  if (!(estimator.eps > 0 && estimator.eps < 1))
    throw std::invalid_argument("config: estimator.eps must be in (0,1)");
  for (const std::string& s : estimator.statistics) {
    const auto& known = known_statistics();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw std::invalid_argument("config: unknown statistic '" + s + "'");
  }
  for (const std::string& f : output.formats)
    if (f != "csv" && f != "json" && f != "spool")
      throw std::invalid_argument("config: unknown output format '" + f + "'");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  reject_unknown_keys(j, {"schema_version", "model", "disorder", "sampler", "estimator",
                          "output", "workers"},
                      "top level");
  ExperimentConfig cfg;
  cfg.schema_version = j.at("schema_version").get<int>();

  const json& jm = j.at("model");
  reject_unknown_keys(jm, {"d", "n", "n_list", "beta", "h", "interaction"}, "model");
  cfg.model.d = jm.at("d").get<int>();
  if (jm.contains("n_list"))
    cfg.model.n_list = jm.at("n_list").get<std::vector<int>>();
  else
    cfg.model.n_list = {jm.at("n").get<int>()};
  cfg.model.beta = jm.at("beta").get<double>();
  cfg.model.h = parse_h_rule(jm.at("h"));
  const std::string inter = jm.value("interaction", "ferro");
  if (inter == "ferro")
    cfg.model.interaction = Interaction::Ferro;
  else if (inter == "antiferro")
    cfg.model.interaction = Interaction::Antiferro;
  else
    throw std::invalid_argument("config: interaction must be ferro|antiferro");

  const json& jd = j.at("disorder");
  reject_unknown_keys(jd, {"distribution", "realizations", "master_seed"}, "disorder");
  cfg.disorder.distribution = parse_disorder_kind(jd.at("distribution").get<std::string>());
  cfg.disorder.realizations = jd.at("realizations").get<int>();
  cfg.disorder.master_seed = jd.at("master_seed").get<std::uint64_t>();

  const json& js = j.at("sampler");
  reject_unknown_keys(js, {"update_kind", "burn_in_sweeps", "thinning", "samples"}, "sampler");
  cfg.sampler.update_kind = parse_update_kind(js.at("update_kind").get<std::string>());
  cfg.sampler.burn_in_sweeps = js.at("burn_in_sweeps").get<int>();
  cfg.sampler.thinning = js.at("thinning").get<int>();
  cfg.sampler.samples = js.at("samples").get<int>();

  const json& je = j.at("estimator");
  reject_unknown_keys(je, {"statistics", "q_hat", "eps", "budgets", "thresholds_file"},
                      "estimator");
  if (je.contains("statistics"))
    cfg.estimator.statistics = je.at("statistics").get<std::vector<std::string>>();
  const json& jq = je.at("q_hat");
  reject_unknown_keys(jq, {"source", "value"}, "estimator.q_hat");
  const std::string qsrc = jq.at("source").get<std::string>();
  if (qsrc == "onsager")
    cfg.estimator.qhat.kind = QhatSource::Kind::Onsager;
  else if (qsrc == "fk-estimate")
    cfg.estimator.qhat.kind = QhatSource::Kind::FkEstimate;
  else if (qsrc == "explicit") {
    cfg.estimator.qhat.kind = QhatSource::Kind::Explicit;
    cfg.estimator.qhat.value = jq.at("value").get<double>();
  } else {
    throw std::invalid_argument("config: q_hat.source must be onsager|fk-estimate|explicit");
  }
  cfg.estimator.eps = je.value("eps", 0.25);
  if (je.contains("budgets")) {
    const json& jb = je.at("budgets");
    reject_unknown_keys(jb,
                        {"triples", "site_tuples", "pairs", "quads", "sites", "ks_pairs",
                         "pure_state_lmax", "ess_floor", "ultra_eps", "stored_triples"},
                        "estimator.budgets");
    EstimatorBudgets& b = cfg.estimator.budgets;
    b.triples = jb.value("triples", b.triples);
    b.site_tuples = jb.value("site_tuples", b.site_tuples);
    b.pairs = jb.value("pairs", b.pairs);
    b.quads = jb.value("quads", b.quads);
    b.sites = jb.value("sites", b.sites);
    b.ks_pairs = jb.value("ks_pairs", b.ks_pairs);
    b.pure_state_lmax = jb.value("pure_state_lmax", b.pure_state_lmax);
    b.ess_floor = jb.value("ess_floor", b.ess_floor);
    b.ultra_eps = jb.value("ultra_eps", b.ultra_eps);
    b.stored_triples = jb.value("stored_triples", b.stored_triples);
  }
  cfg.estimator.thresholds_file = je.value("thresholds_file", "");

  const json& jo = j.at("output");
  reject_unknown_keys(jo, {"directory", "formats"}, "output");
  cfg.output.directory = jo.at("directory").get<std::string>();
  if (jo.contains("formats")) cfg.output.formats = jo.at("formats").get<std::vector<std::string>>();

  cfg.workers = j.value("workers", 1);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::canonical_text() const {
  json j;
  j["schema_version"] = schema_version;
  j["model"]["d"] = model.d;
  j["model"]["n_list"] = model.n_list;
  j["model"]["beta"] = model.beta;
  j["model"]["h"] = h_rule_json(model.h);
  j["model"]["interaction"] = model.interaction == Interaction::Ferro ? "ferro" : "antiferro";
  j["disorder"]["distribution"] = to_string(disorder.distribution);
  j["disorder"]["realizations"] = disorder.realizations;
  j["disorder"]["master_seed"] = disorder.master_seed;
  j["sampler"]["update_kind"] = to_string(sampler.update_kind);
  j["sampler"]["burn_in_sweeps"] = sampler.burn_in_sweeps;
  j["sampler"]["thinning"] = sampler.thinning;
  j["sampler"]["samples"] = sampler.samples;
  j["estimator"]["statistics"] = estimator.statistics;
  switch (estimator.qhat.kind) {
    case QhatSource::Kind::Onsager:
      j["estimator"]["q_hat"]["source"] = "onsager";
      break;
    case QhatSource::Kind::FkEstimate:
      j["estimator"]["q_hat"]["source"] = "fk-estimate";
      break;
    case QhatSource::Kind::Explicit:
      j["estimator"]["q_hat"]["source"] = "explicit";
      j["estimator"]["q_hat"]["value"] = estimator.qhat.value;
      break;
  }
  j["estimator"]["eps"] = estimator.eps;
  j["estimator"]["budgets"]["triples"] = estimator.budgets.triples;
  j["estimator"]["budgets"]["site_tuples"] = estimator.budgets.site_tuples;
  j["estimator"]["budgets"]["pairs"] = estimator.budgets.pairs;
  j["estimator"]["budgets"]["quads"] = estimator.budgets.quads;
  j["estimator"]["budgets"]["sites"] = estimator.budgets.sites;
  j["estimator"]["budgets"]["ks_pairs"] = estimator.budgets.ks_pairs;
  j["estimator"]["budgets"]["pure_state_lmax"] = estimator.budgets.pure_state_lmax;
  j["estimator"]["budgets"]["ess_floor"] = estimator.budgets.ess_floor;
  j["estimator"]["budgets"]["ultra_eps"] = estimator.budgets.ultra_eps;
  j["estimator"]["budgets"]["stored_triples"] = estimator.budgets.stored_triples;
  j["estimator"]["thresholds_file"] = estimator.thresholds_file;
  j["output"]["directory"] = output.directory;
  j["output"]["formats"] = output.formats;
  j["workers"] = workers;
  return j.dump(2);
}

std::uint64_t ExperimentConfig::hash() const {
  // FNV-1a over the canonical text; stable across platforms.
  const std::string text = canonical_text();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace rfim
