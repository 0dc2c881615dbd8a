/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "enloc/forward_models.hpp"
#include "enloc/grf.hpp"
#include "enloc/localization.hpp"
#include "enloc/smoother.hpp"

namespace enloc {

struct LinearModelConfig {
  int n_params = 20;
  int n_data = 10;
  std::uint64_t seed = 1;
};

using ModelConfig = std::variant<ScalarToyConfig, GridFlowConfig, LinearModelConfig>;

/// Independent N(mean, std^2) scalars.
struct ScalarPrior {
  double mean = 0.0;
  double std_dev = 1.0;
};

/// Porosity and log-permeability fields of the grid proxy.
struct GridPrior {
  GrfPrior poro{Variogram::Exponential, 20.0, 8.0, 30.0, 0.2, 0.04};
  GrfPrior logk{Variogram::Exponential, 20.0, 8.0, 30.0, 0.0, 1.0};
};

using PriorConfig = std::variant<ScalarPrior, GridPrior>;

struct ObservationConfig {
  std::uint64_t truth_seed = 1;
  std::uint64_t noise_seed = 2;
  double relative_std = 0.1;
  /// Absolute floor on the error deviation, per data kind ("*" = any kind).
  std::map<std::string, double> floor = {{"*", 0.01}};

  double floor_for(const std::string & kind) const;
};

struct LocalizationEntry {
  std::string label;
  LocalizationPolicy policy;
};

struct ReferenceConfig {
  int ensemble_size = 5000;
  std::uint64_t seed = 99;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelConfig model = ScalarToyConfig{};
  PriorConfig prior = ScalarPrior{};
  ObservationConfig observations;
  MdaSchedule schedule = MdaSchedule::uniform(4);
  std::vector<LocalizationEntry> localization;
  int ensemble_size = 100;
  int run_count = 10;
  std::uint64_t base_seed = 1000;
  std::optional<ReferenceConfig> reference;
  Index block_width = kDefaultBlockWidth;
  bool freeze_tapers = true;
  std::vector<int> sweep_ensemble_sizes;
  std::vector<int> sweep_layer_counts;
  /// Grid proxy only: report taper mass outside mask + halo at this prior
  /// correlation threshold.
  std::optional<double> halo_threshold;
  bool write_posterior = false;
  std::filesystem::path output_dir = "enloc_out";

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Parses JSON text; every error is reported as ConfigError.
ExperimentConfig parse_config(const std::string & json_text);
ExperimentConfig load_config(const std::filesystem::path & path);

}  // namespace enloc
