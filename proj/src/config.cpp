/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "enloc/error.hpp"

namespace enloc {

using json = nlohmann::json;

double ObservationConfig::floor_for(const std::string & kind) const {
  if (auto it = floor.find(kind); it != floor.end()) return it->second;
  if (auto it = floor.find("*"); it != floor.end()) return it->second;
  return 0.0;
}

namespace {

// -----------------------------------------------------------------------------
// Small helpers that reject unknown keys and wrong types with a path in the
// message.

void check_keys(const json & obj, const std::string & where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto & [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json & obj, const char * key, T & out, const std::string & where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError("invalid value for '" + std::string(key) + "' in " + where);
  }
}

ScalarToyConfig parse_scalar_toy(const json & j) {
  check_keys(j, "model", {"kind", "n_active", "n_dummy", "n_sources", "n_times", "n_features",
                          "seed"});
  ScalarToyConfig c;
  read(j, "n_active", c.n_active, "model");
  read(j, "n_dummy", c.n_dummy, "model");
  read(j, "n_sources", c.n_sources, "model");
  read(j, "n_times", c.n_times, "model");
  read(j, "n_features", c.n_features, "model");
  read(j, "seed", c.seed, "model");
  return c;
}

GridFlowConfig parse_grid(const json & j) {
  check_keys(j, "model", {"kind", "nx", "ny", "n_layers", "patterns_x", "patterns_y", "n_times",
                          "corridor_half_width", "time_scale", "ramp_width", "nominal_rate",
                          "min_porosity"});
  GridFlowConfig c;
  read(j, "nx", c.nx, "model");
  read(j, "ny", c.ny, "model");
  read(j, "n_layers", c.n_layers, "model");
  read(j, "patterns_x", c.patterns_x, "model");
  read(j, "patterns_y", c.patterns_y, "model");
  read(j, "n_times", c.n_times, "model");
  read(j, "corridor_half_width", c.corridor_half_width, "model");
  read(j, "time_scale", c.time_scale, "model");
  read(j, "ramp_width", c.ramp_width, "model");
  read(j, "nominal_rate", c.nominal_rate, "model");
  read(j, "min_porosity", c.min_porosity, "model");
  return c;
}

LinearModelConfig parse_linear(const json & j) {
  check_keys(j, "model", {"kind", "n_params", "n_data", "seed"});
  LinearModelConfig c;
  read(j, "n_params", c.n_params, "model");
  read(j, "n_data", c.n_data, "model");
  read(j, "seed", c.seed, "model");
  return c;
}

ModelConfig parse_model(const json & j) {
  std::string kind;
  if (!j.is_object()) throw ConfigError("model must be an object");
  read(j, "kind", kind, "model");
  if (kind == "scalar_toy") return parse_scalar_toy(j);
  if (kind == "grid_proxy") return parse_grid(j);
  if (kind == "linear") return parse_linear(j);
  throw ConfigError("unknown model kind '" + kind + "'");
}

GrfPrior parse_field(const json & j, const std::string & where, GrfPrior field) {
  check_keys(j, where, {"variogram", "range_major", "range_minor", "angle", "mean", "std"});
  std::string variogram = to_string(field.kind);
  read(j, "variogram", variogram, where);
  try {
    field.kind = parse_variogram(variogram);
  } catch (const InvalidArgument & e) {
    throw ConfigError(std::string(e.what()) + " in " + where);
  }
  read(j, "range_major", field.range_major, where);
  read(j, "range_minor", field.range_minor, where);
  read(j, "angle", field.angle_deg, where);
  read(j, "mean", field.mean, where);
  read(j, "std", field.std_dev, where);
  return field;
}

PriorConfig parse_prior(const json & j) {
  std::string kind;
  if (!j.is_object()) throw ConfigError("prior must be an object");
  read(j, "kind", kind, "prior");
  if (kind == "scalar") {
    check_keys(j, "prior", {"kind", "mean", "std"});
    ScalarPrior p;
    read(j, "mean", p.mean, "prior");
    read(j, "std", p.std_dev, "prior");
    return p;
  }
  if (kind == "grf") {
    check_keys(j, "prior", {"kind", "poro", "logk"});
    GridPrior p;
    if (j.contains("poro")) p.poro = parse_field(j["poro"], "prior.poro", p.poro);
    if (j.contains("logk")) p.logk = parse_field(j["logk"], "prior.logk", p.logk);
    return p;
  }
  throw ConfigError("unknown prior kind '" + kind + "'");
}

ObservationConfig parse_observations(const json & j) {
  check_keys(j, "observations", {"truth_seed", "noise_seed", "relative_std", "floor"});
  ObservationConfig c;
  read(j, "truth_seed", c.truth_seed, "observations");
  read(j, "noise_seed", c.noise_seed, "observations");
  read(j, "relative_std", c.relative_std, "observations");
  if (j.contains("floor")) {
    const json & f = j["floor"];
    c.floor.clear();
    if (f.is_number()) {
      c.floor["*"] = f.get<double>();
    } else if (f.is_object()) {
      for (const auto & [kind, value] : f.items()) {
        if (!value.is_number()) throw ConfigError("observation floor must be numeric");
        c.floor[kind] = value.get<double>();
      }
    } else {
      throw ConfigError("observations.floor must be a number or an object");
    }
  }
  return c;
}

MdaSchedule parse_schedule(const json & j) {
  check_keys(j, "schedule", {"n_a", "alphas"});
  if (j.contains("alphas")) {
    MdaSchedule s;
    read(j, "alphas", s.alphas, "schedule");
    return s;
  }
  int n_a = 4;
  read(j, "n_a", n_a, "schedule");
  if (n_a < 1) throw ConfigError("schedule.n_a must be at least 1");
  return MdaSchedule::uniform(n_a);
}

std::vector<LocalizationEntry> parse_localization(const json & j) {
  if (!j.is_array()) throw ConfigError("localization must be a list");
  std::vector<LocalizationEntry> out;
  for (const auto & item : j) {
    check_keys(item, "localization entry", {"label", "taper", "t0"});
    std::string taper_text = "none";
    std::string t0_text;
    LocalizationEntry entry;
    read(item, "taper", taper_text, "localization entry");
    read(item, "t0", t0_text, "localization entry");
    try {
      entry.policy.spec = taper::parse_taper_spec(taper_text);
      if (!t0_text.empty()) entry.policy.t0_strategy = significance::parse_t0_strategy(t0_text);
    } catch (const InvalidArgument & e) {
      throw ConfigError(e.what());
    }
    entry.label = taper::family_name(entry.policy.spec);
    read(item, "label", entry.label, "localization entry");
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

// -----------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (run_count < 1) throw ConfigError("runs.count must be at least 1");
  if (ensemble_size < 3) throw ConfigError("ensemble_size must be at least 3");
  if (block_width < 1) throw ConfigError("block_width must be positive");
  if (localization.empty()) throw ConfigError("localization list is empty");
  if (!(observations.relative_std >= 0.0)) throw ConfigError("relative_std must be >= 0");
  for (const auto & [kind, value] : observations.floor) {
    if (!(value >= 0.0)) throw ConfigError("observation floor must be >= 0");
  }
  bool any_floor = false;
  for (const auto & [kind, value] : observations.floor) any_floor = any_floor || value > 0.0;
  if (observations.relative_std == 0.0 && !any_floor) {
    throw ConfigError("observation errors would be zero; set relative_std or floor");
  }
  std::set<std::string> labels;
  for (const auto & entry : localization) {
    if (entry.label.empty() || entry.label.find(',') != std::string::npos) {
      throw ConfigError("localization labels must be non-empty and contain no commas");
    }
    if (!labels.insert(entry.label).second) {
      throw ConfigError("duplicate localization label '" + entry.label + "'");
    }
    try {
      taper::validate(entry.policy.spec);
    } catch (const InvalidArgument & e) {
      throw ConfigError(e.what());
    }
    if (std::holds_alternative<taper::DistanceGC>(entry.policy.spec) &&
        !std::holds_alternative<GridFlowConfig>(model)) {
      throw ConfigError("distance tapers need the grid_proxy model");
    }
  }
  try {
    schedule.validate();
  } catch (const InvalidArgument & e) {
    throw ConfigError(e.what());
  }
  const bool grid = std::holds_alternative<GridFlowConfig>(model);
  if (grid != std::holds_alternative<GridPrior>(prior)) {
    throw ConfigError("grid_proxy needs a grf prior and other models a scalar prior");
  }
  if (reference && reference->ensemble_size < 3) {
    throw ConfigError("reference.ensemble_size must be at least 3");
  }
  for (int n : sweep_ensemble_sizes) {
    if (n < 3) throw ConfigError("sweep ensemble sizes must be at least 3");
  }
  for (int n : sweep_layer_counts) {
    if (n < 1) throw ConfigError("sweep layer counts must be at least 1");
  }
  if (halo_threshold && !grid) throw ConfigError("locality needs the grid_proxy model");
}

ExperimentConfig parse_config(const std::string & json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, "config", {"name", "model", "prior", "observations", "schedule",
                              "localization", "ensemble_size", "runs", "reference",
                              "block_width", "freeze_tapers", "sweep", "locality", "output"});
  ExperimentConfig c;
  read(root, "name", c.name, "config");
  if (root.contains("model")) c.model = parse_model(root["model"]);
  if (std::holds_alternative<GridFlowConfig>(c.model)) c.prior = GridPrior{};
  if (root.contains("prior")) c.prior = parse_prior(root["prior"]);
  if (root.contains("observations")) c.observations = parse_observations(root["observations"]);
  if (root.contains("schedule")) c.schedule = parse_schedule(root["schedule"]);
  read(root, "ensemble_size", c.ensemble_size, "config");
  read(root, "block_width", c.block_width, "config");
  read(root, "freeze_tapers", c.freeze_tapers, "config");
  if (root.contains("localization")) {
    c.localization = parse_localization(root["localization"]);
  } else {
    c.localization.push_back({"none", LocalizationPolicy{}});
  }
  for (auto & entry : c.localization) entry.policy.freeze = c.freeze_tapers;
  if (root.contains("runs")) {
    const json & r = root["runs"];
    check_keys(r, "runs", {"count", "base_seed"});
    read(r, "count", c.run_count, "runs");
    read(r, "base_seed", c.base_seed, "runs");
  }
  if (root.contains("reference")) {
    const json & r = root["reference"];
    check_keys(r, "reference", {"ensemble_size", "seed"});
    ReferenceConfig ref;
    read(r, "ensemble_size", ref.ensemble_size, "reference");
    read(r, "seed", ref.seed, "reference");
    c.reference = ref;
  }
  if (root.contains("sweep")) {
    const json & s = root["sweep"];
    check_keys(s, "sweep", {"ensemble_sizes", "layer_counts"});
    read(s, "ensemble_sizes", c.sweep_ensemble_sizes, "sweep");
    read(s, "layer_counts", c.sweep_layer_counts, "sweep");
  }
  if (root.contains("locality")) {
    const json & l = root["locality"];
    check_keys(l, "locality", {"halo_threshold"});
    double threshold = 0.05;
    read(l, "halo_threshold", threshold, "locality");
    c.halo_threshold = threshold;
  }
  if (root.contains("output")) {
    const json & o = root["output"];
    check_keys(o, "output", {"dir", "write_posterior"});
    std::string dir = c.output_dir.string();
    read(o, "dir", dir, "output");
    c.output_dir = dir;
    read(o, "write_posterior", c.write_posterior, "output");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path & path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace enloc
