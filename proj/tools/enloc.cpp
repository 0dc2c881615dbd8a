/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

/// enloc command line: experiments, sweeps and the t0 table.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "enloc/config.hpp"
#include "enloc/error.hpp"
#include "enloc/experiment.hpp"
#include "enloc/text.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<unsigned long long> seed;
  int threads = 0;
};

void add_common(CLI::App * cmd, CommonOptions & opts) {
  cmd->add_option("config", opts.config, "Experiment config (JSON)")->required();
  cmd->add_option("--out", opts.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", opts.seed, "Base seed of the repeated runs");
  cmd->add_option("--threads", opts.threads, "Worker threads (ENLOC_THREADS overrides)");
}

void set_threads(int requested) {
  if (const char * env = std::getenv("ENLOC_THREADS")) {
    try {
      requested = static_cast<int>(enloc::text::parse_int(env));
    } catch (const enloc::ParseError &) {
      throw enloc::ConfigError("ENLOC_THREADS must be an integer");
    }
  }
#ifdef _OPENMP
  if (requested > 0) omp_set_num_threads(requested);
#else
  (void)requested;
#endif
}

enloc::ExperimentConfig prepare(const CommonOptions & opts) {
  set_threads(opts.threads);
  enloc::ExperimentConfig config = enloc::load_config(opts.config);
  if (!opts.out.empty()) config.output_dir = opts.out;
  if (opts.seed) config.base_seed = *opts.seed;
  return config;
}

}  // namespace

// -----------------------------------------------------------------------------

int main(int argc, char ** argv) {
  CLI::App app{"Correlation-based localization experiments for ES-MDA"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto * run_cmd = app.add_subcommand("run", "Run an experiment");
  add_common(run_cmd, run_opts);

  CommonOptions ne_opts;
  std::vector<int> sizes;
  auto * ne_cmd = app.add_subcommand("sweep-ne", "Repeat an experiment over ensemble sizes");
  add_common(ne_cmd, ne_opts);
  ne_cmd->add_option("--sizes", sizes, "Ensemble sizes (default: sweep.ensemble_sizes)")
      ->delimiter(',');

  CommonOptions layer_opts;
  std::vector<int> layers;
  auto * layer_cmd = app.add_subcommand("sweep-layers", "Repeat a grid experiment over layer counts");
  add_common(layer_cmd, layer_opts);
  layer_cmd->add_option("--layers", layers, "Layer counts (default: sweep.layer_counts)")
      ->delimiter(',');

  std::vector<int> ne_list{50, 100, 200, 1000};
  std::vector<double> phi_list{0.10, 0.05, 0.01};
  std::string t0_out;
  auto * t0_cmd = app.add_subcommand("t0-table", "Critical t0 and rho0 for ensemble sizes and levels");
  t0_cmd->add_option("--ne", ne_list, "Ensemble sizes")->delimiter(',');
  t0_cmd->add_option("--phi", phi_list, "Significance levels")->delimiter(',');
  t0_cmd->add_option("--out", t0_out, "Write the table to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) {
      const enloc::ExperimentConfig config = prepare(run_opts);
      const auto report = enloc::run_experiment(config, &std::cerr);
      return report.any_failure() ? kExitRun : 0;
    }
    if (*ne_cmd) {
      const enloc::ExperimentConfig config = prepare(ne_opts);
      const auto & list = sizes.empty() ? config.sweep_ensemble_sizes : sizes;
      if (list.empty()) throw enloc::ConfigError("no ensemble sizes given");
      const auto result = enloc::sweep_ensemble_size(config, list, &std::cerr);
      for (const auto & r : result.reports) {
        if (r.any_failure()) return kExitRun;
      }
      return 0;
    }
    if (*layer_cmd) {
      const enloc::ExperimentConfig config = prepare(layer_opts);
      const auto & list = layers.empty() ? config.sweep_layer_counts : layers;
      if (list.empty()) throw enloc::ConfigError("no layer counts given");
      const auto result = enloc::sweep_layers(config, list, &std::cerr);
      for (const auto & r : result.reports) {
        if (r.any_failure()) return kExitRun;
      }
      return 0;
    }
    if (*t0_cmd) {
      enloc::csv::Table table = [&] {
        try {
          return enloc::t0_table(ne_list, phi_list);
        } catch (const enloc::InvalidArgument & e) {
          throw enloc::ConfigError(e.what());
        }
      }();
      if (t0_out.empty()) {
        std::cout << table.str();
      } else {
        enloc::csv::write_atomic(t0_out, table.str());
      }
      return 0;
    }
  } catch (const enloc::ConfigError & e) {
    std::cerr << "enloc: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception & e) {
    std::cerr << "enloc: " << e.what() << '\n';
    return kExitRun;
  }
  return 0;
}
