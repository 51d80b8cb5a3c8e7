// Orchestration: configuration-driven disorder sweeps (reweighting and direct),
// oracle comparison runs, q estimation, re-analysis from spools and plot-table
// emission.
#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rfim/config.hpp"
#include "rfim/enumerate.hpp"
#include "rfim/estimators.hpp"
#include "rfim/fk.hpp"
#include "rfim/result_store.hpp"
#include "rfim/runner_types.hpp"

namespace rfim {

QhatResolved resolve_q_hat(const ExperimentConfig& cfg, int n);

std::uint64_t disorder_seed_for(std::uint64_t master_seed, int index);

// Shared zero-field base stream for one lattice size.
SampleArchive zero_field_stream(const Lattice& lat, double beta, const SamplerBlock& sampler,
                                std::uint64_t master_seed, int n);

// Reweighting sweep over disorder realizations on a shared zero-field stream.
// `skip` indices are omitted (resume); each finished record is handed to
// `sink` in ascending index order.
DisorderSweep run_disorder_sweep(const Lattice& lat, const SampleArchive& zero_field,
                                 const SweepSpec& spec, const std::set<int>* skip = nullptr,
                                 const std::function<void(const QuenchedRecord&)>& sink = {});

// Direct-sampling sweep: one ghost-field chain per disorder realization. Used
// where reweighting degenerates (the large-h regime).
DisorderSweep run_direct_sweep(const Lattice& lat, const SweepSpec& spec,
                               const SampleSchedule& schedule);

std::vector<std::string> record_rows(const QuenchedRecord& rec);
std::vector<QuenchedRecord> records_from_csv(const std::vector<std::string>& lines);

struct RunLimits {
  int max_disorders = -1;  // testing hook for the resume contract
};

// Returns the number of failed threshold checks (process exit code).
int run_experiment(const ExperimentConfig& cfg, ResultStore& store, const RunLimits& limits = {});

struct EnumerateCheckRow {
  std::string name;
  double mc = 0, exact = 0, se = 0, z = 0;
  bool pass = true;
};
struct EnumerateCheckReport {
  std::vector<EnumerateCheckRow> rows;
  bool all_pass = true;
};
EnumerateCheckReport enumerate_check(const ExperimentConfig& cfg);

int run_estimate_q(const ExperimentConfig& cfg, ResultStore& store);
int run_analyze(const ExperimentConfig& cfg, ResultStore& store);
int emit_plot_data(ResultStore& store, const std::string& kind, const ExperimentConfig& cfg);

std::string format_g17(double v);

}  // namespace rfim
