/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "enloc/config.hpp"
#include "enloc/csv.hpp"
#include "enloc/ensemble.hpp"
#include "enloc/forward_models.hpp"
#include "enloc/observations.hpp"

namespace enloc {

struct StepMetrics {
  int step = 0;
  double obj_mean = 0.0;
  double nv = 1.0;
  std::optional<double> nv_dummy;
  double mean_offset = 0.0;
  /// Of the taper applied to reach this step; empty at step 0.
  std::optional<double> n_eff;
  std::optional<double> chi;
  std::optional<double> outside_fraction;
  bool obj_in_band = false;
};

/// One assimilation of one localization entry.
struct RunRecord {
  std::string label;
  int run = 0;
  std::uint64_t seed = 0;
  int ensemble_size = 0;
  std::vector<StepMetrics> steps;
  std::vector<std::uint64_t> histogram;
  bool failed = false;
  std::string error;

  const StepMetrics & final_step() const {return steps.back();}
};

/// mean +- 1.96 standard errors over the successful runs of one label.
struct Aggregate {
  std::string label;
  std::string metric;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;  ///< the reference run, when present, has label "reference"
  std::vector<Aggregate> aggregates;

  bool any_failure() const;
  /// Final-step records of one label, in run order (failed runs skipped).
  std::vector<const RunRecord *> records(const std::string & label) const;
  const Aggregate * aggregate(const std::string & label, const std::string & metric) const;
};

Aggregate aggregate_values(const std::string & label, const std::string & metric,
                           const std::vector<double> & values);

/// Model, truth, observations and prior generator of one configuration.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  ~Experiment();

  const ExperimentConfig & config() const {return config_;}
  const ForwardModel & model() const {return *model_;}
  const ObservationSet & observations() const {return obs_;}
  const Eigen::VectorXd & truth() const {return truth_;}
  const Eigen::VectorXd & true_data() const {return true_data_;}

  /// Prior ensemble of n_e members; member k draws from its own substream.
  Ensemble sample_prior(int n_e, const RunSeed & seed) const;

  /// Runs every (run, localization) pair plus the optional reference run.
  /// Artifacts are written when `write` is set. Progress goes to `log`.
  ExperimentReport run(bool write = true, std::ostream * log = nullptr) const;

 private:
  struct Impl;
  Eigen::VectorXd sample_member(std::mt19937_64 & gen) const;
  RunRecord assimilate(const std::string & label, const LocalizationPolicy & policy,
                       const Ensemble & prior, int run, std::uint64_t seed,
                       Eigen::VectorXd * nv_field_sum) const;

  ExperimentConfig config_;
  std::unique_ptr<ForwardModel> model_;
  std::unique_ptr<Impl> impl_;
  ObservationSet obs_;
  Eigen::VectorXd truth_;
  Eigen::VectorXd true_data_;
};

ExperimentReport run_experiment(const ExperimentConfig & config, std::ostream * log = nullptr);

struct SweepResult {
  std::vector<int> values;  ///< ensemble sizes or layer counts
  std::vector<ExperimentReport> reports;
};

/// One experiment per ensemble size under <output_dir>/ne<size>, plus trend.csv.
SweepResult sweep_ensemble_size(const ExperimentConfig & config, const std::vector<int> & sizes,
                                std::ostream * log = nullptr);

/// One experiment per layer count under <output_dir>/layers<n>, plus
/// neff_table.csv. A "none" entry is added when the list lacks one.
SweepResult sweep_layers(const ExperimentConfig & config, const std::vector<int> & layer_counts,
                         std::ostream * log = nullptr);

/// ne,phi,t0,rho0 for every combination.
csv::Table t0_table(const std::vector<int> & ne_list, const std::vector<double> & phi_list);

}  // namespace enloc
