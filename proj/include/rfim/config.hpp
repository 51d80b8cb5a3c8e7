// Experiment configuration: strict JSON with a schema version, canonical
// serialization and a stable hash embedded in every output.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfim/disorder.hpp"
#include "rfim/estimators.hpp"
#include "rfim/samplers.hpp"
#include "rfim/spin.hpp"

namespace rfim {

inline constexpr int kConfigSchemaVersion = 1;

struct HRule {
  enum class Kind { Constant, Power } kind = Kind::Constant;
  double c = 0.0;  // constant value, or prefactor of c * n^a
  double a = 0.0;
  double value_at(int n) const;
};

struct ModelBlock {
  int d = 2;
  std::vector<int> n_list;
  double beta = 0.6;
  HRule h;
  Interaction interaction = Interaction::Ferro;
};

struct DisorderBlock {
  DisorderKind distribution = DisorderKind::Gaussian;
  int realizations = 0;
  std::uint64_t master_seed = 1;
};

struct SamplerBlock {
  UpdateKind update_kind = UpdateKind::Cluster;
  int burn_in_sweeps = 2000;
  int thinning = 10;
  int samples = 4000;
};

struct QhatSource {
  enum class Kind { Onsager, FkEstimate, Explicit } kind = Kind::Onsager;
  double value = 0.0;  // for Explicit
};

struct EstimatorBlock {
  std::vector<std::string> statistics;  // empty = all applicable
  QhatSource qhat;
  double eps = 0.25;  // correlation-uniformity window
  EstimatorBudgets budgets;
  std::string thresholds_file;
};

struct OutputBlock {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json"};  // + "spool"
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  ModelBlock model;
  DisorderBlock disorder;
  SamplerBlock sampler;
  EstimatorBlock estimator;
  OutputBlock output;
  int workers = 1;

  void validate() const;  // throws std::invalid_argument
  std::string canonical_text() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  static ExperimentConfig from_json_text(const std::string& text);  // strict, rejects unknown keys
  static ExperimentConfig load(const std::string& path);
};

const std::vector<std::string>& known_statistics();

}  // namespace rfim
