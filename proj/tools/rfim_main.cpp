// Command-line front end: simulate / enumerate-check / estimate-q / analyze /
// plot-data. Exit code is nonzero iff any requested acceptance check fails.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "rfim/config.hpp"
#include "rfim/result_store.hpp"
#include "rfim/runner.hpp"
#include "rfim/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rfim: random-field Ising model laboratory"};
  app.set_version_flag("--version", rfim::kCodeVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  int workers_override = 0;
  std::string plot_kind;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed_override, "override the master seed")
        ->each([&](const std::string&) { has_seed = true; });
    sub->add_option("--workers", workers_override, "override worker count");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one disorder sweep");
  add_common(simulate);
  CLI::App* enum_check = app.add_subcommand("enumerate-check", "compare samplers to enumeration");
  add_common(enum_check);
  CLI::App* estimate_q = app.add_subcommand("estimate-q", "estimate q from FK connectivity");
  add_common(estimate_q);
  CLI::App* analyze = app.add_subcommand("analyze", "recompute statistics from spools");
  add_common(analyze);
  CLI::App* plot = app.add_subcommand("plot-data", "emit tabular plot files");
  add_common(plot);
  plot->add_option("--kind", plot_kind, "overlap-hist|nsa-scatter|triple-support|trend")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    rfim::ExperimentConfig cfg = rfim::ExperimentConfig::load(config_path);
    if (has_seed) cfg.disorder.master_seed = seed_override;
    if (workers_override > 0) cfg.workers = workers_override;
    cfg.validate();
    rfim::ResultStore store(cfg.output.directory);

    if (simulate->parsed()) {
      const int failures = rfim::run_experiment(cfg, store);
      std::printf("simulate: %d threshold failure(s), outputs in %s\n", failures,
                  store.directory().c_str());
      return failures == 0 ? 0 : 1;
    }
    if (enum_check->parsed()) {
      const auto report = rfim::enumerate_check(cfg);
      int fails = 0;
      for (const auto& row : report.rows) {
        if (!row.pass) ++fails;
        std::printf("%-28s mc=% .6f exact=% .6f se=%.2e z=%.2f %s\n", row.name.c_str(), row.mc,
                    row.exact, row.se, row.z, row.pass ? "pass" : "FAIL");
      }
      std::printf("enumerate-check: %zu rows, %d failure(s)\n", report.rows.size(), fails);
      return fails == 0 ? 0 : 1;
    }
    if (estimate_q->parsed()) {
      return rfim::run_estimate_q(cfg, store);
    }
    if (analyze->parsed()) {
      return rfim::run_analyze(cfg, store);
    }
    if (plot->parsed()) {
      rfim::emit_plot_data(store, plot_kind, cfg);
      std::printf("plot-data: wrote %s tables to %s\n", plot_kind.c_str(),
                  store.directory().c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
