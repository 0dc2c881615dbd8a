/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

#include "enloc/error.hpp"
#include "enloc/metrics.hpp"
#include "enloc/significance.hpp"
#include "enloc/smoother.hpp"
#include "enloc/text.hpp"

namespace enloc {

namespace {

template <class... Ts> struct Overloaded : Ts... {using Ts::operator()...;};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

const char * const kFinalMetrics[] = {"obj_mean", "nv", "nv_dummy", "mean_offset", "n_eff",
                                      "chi", "outside_fraction"};

std::optional<double> final_metric(const StepMetrics & m, const std::string & name) {
  if (name == "obj_mean") return m.obj_mean;
  if (name == "nv") return m.nv;
  if (name == "nv_dummy") return m.nv_dummy;
  if (name == "mean_offset") return m.mean_offset;
  if (name == "n_eff") return m.n_eff;
  if (name == "chi") return m.chi;
  if (name == "outside_fraction") return m.outside_fraction;
  return std::nullopt;
}

std::string optional_cell(const std::optional<double> & value) {
  return value ? text::format_double(*value) : std::string();
}

void note(std::ostream * log, const std::string & message) {
  if (log) *log << "[enloc] " << message << std::endl;
}

}  // namespace

// -----------------------------------------------------------------------------

bool ExperimentReport::any_failure() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunRecord & r) {return r.failed;});
}

std::vector<const RunRecord *> ExperimentReport::records(const std::string & label) const {
  std::vector<const RunRecord *> out;
  for (const auto & r : runs) {
    if (r.label == label && !r.failed) out.push_back(&r);
  }
  return out;
}

const Aggregate * ExperimentReport::aggregate(const std::string & label,
                                              const std::string & metric) const {
  for (const auto & a : aggregates) {
    if (a.label == label && a.metric == metric) return &a;
  }
  return nullptr;
}

Aggregate aggregate_values(const std::string & label, const std::string & metric,
                           const std::vector<double> & values) {
  Aggregate a;
  a.label = label;
  a.metric = metric;
  a.n = static_cast<int>(values.size());
  if (values.empty()) {
    a.mean = a.ci_low = a.ci_high = std::numeric_limits<double>::quiet_NaN();
    return a;
  }
  metrics::CompensatedSum sum;
  for (double v : values) sum.add(v);
  a.mean = sum.value() / a.n;
  double half = 0.0;
  if (a.n > 1) {
    metrics::CompensatedSum sq;
    for (double v : values) sq.add((v - a.mean) * (v - a.mean));
    half = 1.96 * std::sqrt(sq.value() / (a.n - 1.0)) / std::sqrt(static_cast<double>(a.n));
  }
  a.ci_low = a.mean - half;
  a.ci_high = a.mean + half;
  return a;
}

// -----------------------------------------------------------------------------

struct Experiment::Impl {
  std::unique_ptr<GrfSampler> poro;
  std::unique_ptr<GrfSampler> logk;
  std::vector<Index> dummy;
  // Locality bookkeeping for the grid proxy: allowed rows per well.
  std::vector<std::vector<Index>> allowed;
  std::vector<std::size_t> allowed_of_datum;
};

Experiment::Experiment(ExperimentConfig config)
  : config_(std::move(config)), impl_(std::make_unique<Impl>())
{
  config_.validate();
  std::visit(Overloaded{
      [&](const ScalarToyConfig & c) {
        auto toy = std::make_unique<ScalarToyModel>(c);
        impl_->dummy = toy->dummy_indices();
        model_ = std::move(toy);
      },
      [&](const GridFlowConfig & c) {model_ = std::make_unique<GridFlowProxy>(c);},
      [&](const LinearModelConfig & c) {
        if (c.n_params < 1 || c.n_data < 1) throw ConfigError("linear model needs positive sizes");
        auto gen = RunSeed{c.seed}.stream(StreamPurpose::ModelSetup, 0, 0);
        Eigen::VectorXd flat(static_cast<Index>(c.n_data) * c.n_params);
        fill_standard_normal(gen, flat);
        Eigen::MatrixXd g = Eigen::Map<Eigen::MatrixXd>(flat.data(), c.n_data, c.n_params);
        g /= std::sqrt(static_cast<double>(c.n_params));
        model_ = std::make_unique<LinearModel>(std::move(g));
      },
    }, config_.model);

  if (const auto * grid = std::get_if<GridPrior>(&config_.prior)) {
    const auto & g = std::get<GridFlowConfig>(config_.model);
    impl_->poro = std::make_unique<GrfSampler>(grid->poro, g.nx, g.ny);
    impl_->logk = std::make_unique<GrfSampler>(grid->logk, g.nx, g.ny);
  }

  // Truth and noisy observations.
  auto truth_gen = RunSeed{config_.observations.truth_seed}.stream(StreamPurpose::Truth, 0, 0);
  truth_ = sample_member(truth_gen);
  true_data_ = model_->evaluate(truth_);
  const auto data = model_->data_info();
  obs_.sigma_e.resize(true_data_.size());
  for (Index j = 0; j < true_data_.size(); ++j) {
    obs_.sigma_e[j] = std::max(config_.observations.relative_std * std::abs(true_data_[j]),
                               config_.observations.floor_for(data[j].kind));
  }
  auto noise_gen =
      RunSeed{config_.observations.noise_seed}.stream(StreamPurpose::ObservationNoise, 0, 0);
  Eigen::VectorXd noise(true_data_.size());
  fill_standard_normal(noise_gen, noise);
  obs_.d_obs = true_data_ + obs_.sigma_e.cwiseProduct(noise);
  try {
    obs_.validate();
  } catch (const InvalidArgument & e) {
    throw ConfigError(std::string("observation errors: ") + e.what());
  }

  if (config_.halo_threshold) {
    const auto & proxy = static_cast<const GridFlowProxy &>(*model_);
    const auto & grid = std::get<GridPrior>(config_.prior);
    const auto & g = proxy.config();
    const auto & wells = proxy.wells();
    const auto masks = proxy.sensitivity_mask();
    for (std::size_t w = 0; w < wells.size(); ++w) {
      const auto & rows = masks[w * g.n_times];
      // Planar footprint of the mask, then its halo per field.
      std::vector<std::pair<int, int>> cells;
      const Index plane = static_cast<Index>(g.nx) * g.ny;
      for (Index r : rows) {
        if (r >= plane) break;
        cells.emplace_back(static_cast<int>(r % g.nx), static_cast<int>(r / g.nx));
      }
      std::vector<Index> allowed(rows);
      for (int f = 0; f < GridFlowProxy::kFields; ++f) {
        const GrfPrior & prior = f == 0 ? grid.poro : grid.logk;
        for (const auto & [i, j] : correlation_halo(prior, g.nx, g.ny, cells,
                                                    *config_.halo_threshold)) {
          for (int k = 0; k < g.n_layers; ++k) allowed.push_back(proxy.param_index(f, i, j, k));
        }
      }
      std::sort(allowed.begin(), allowed.end());
      allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
      impl_->allowed.push_back(std::move(allowed));
      for (int n = 0; n < g.n_times; ++n) impl_->allowed_of_datum.push_back(w);
    }
  }
}

Experiment::~Experiment() = default;

Eigen::VectorXd Experiment::sample_member(std::mt19937_64 & gen) const {
  Eigen::VectorXd m(model_->n_params());
  if (const auto * scalar = std::get_if<ScalarPrior>(&config_.prior)) {
    fill_standard_normal(gen, m);
    m = (scalar->std_dev * m).array() + scalar->mean;
    return m;
  }
  const auto & g = std::get<GridFlowConfig>(config_.model);
  const Index plane = static_cast<Index>(g.nx) * g.ny;
  for (int f = 0; f < GridFlowProxy::kFields; ++f) {
    const GrfSampler & sampler = f == 0 ? *impl_->poro : *impl_->logk;
    for (int k = 0; k < g.n_layers; ++k) {
      sampler.sample(gen, m.segment((static_cast<Index>(f) * g.n_layers + k) * plane, plane));
    }
  }
  return m;
}

Ensemble Experiment::sample_prior(int n_e, const RunSeed & seed) const {
  if (n_e < 2) throw InvalidEnsembleSize("an ensemble needs at least 2 members");
  Eigen::MatrixXd values(model_->n_params(), n_e);
  for (int k = 0; k < n_e; ++k) {
    auto gen = seed.stream(StreamPurpose::Prior, 0, static_cast<std::uint64_t>(k));
    values.col(k) = sample_member(gen);
  }
  return Ensemble(std::move(values), model_->parameter_info());
}

RunRecord Experiment::assimilate(const std::string & label, const LocalizationPolicy & policy,
                                 const Ensemble & prior, int run, std::uint64_t seed,
                                 Eigen::VectorXd * nv_field_sum) const {
  RunRecord record;
  record.label = label;
  record.run = run;
  record.seed = seed;
  record.ensemble_size = static_cast<int>(prior.n_members());

  std::optional<double> outside;
  EsmdaOptions options;
  options.block_width = config_.block_width;
  if (!impl_->allowed.empty()) {
    options.on_localizer = [&](int step, const Localizer & loc) {
      if (step == 0 || !policy.freeze) {
        outside = metrics::outside_mass_fraction(loc.provider(), loc.n_params(), impl_->allowed,
                                                 impl_->allowed_of_datum, config_.block_width);
      }
    };
  }
  options.on_step = [&](int step, const Ensemble & ens, const PredictedEnsemble & pred) {
    StepMetrics m;
    m.step = step;
    m.obj_mean = metrics::objective_function(pred, obs_);
    m.obj_in_band = metrics::in_objective_band(m.obj_mean);
    m.nv = metrics::normalized_variance(prior, ens);
    if (!impl_->dummy.empty()) m.nv_dummy = metrics::normalized_variance(prior, ens, impl_->dummy);
    m.mean_offset = metrics::mean_offset(prior, ens).value;
    if (step > 0) m.outside_fraction = outside;
    record.steps.push_back(m);
  };

  try {
    const EsmdaResult result = run_esmda(prior, *model_, obs_, config_.schedule, policy,
                                         RunSeed{seed}, options);
    for (std::size_t s = 1; s < result.steps.size(); ++s) {
      record.steps[s].n_eff = result.steps[s].n_eff;
      record.steps[s].chi = result.steps[s].chi;
    }
    if (result.steps.size() > 1) record.histogram = result.steps[1].taper_histogram;
    if (nv_field_sum) {
      *nv_field_sum += metrics::variance_ratio_per_row(prior, result.posterior);
    }
    if (config_.write_posterior) {
      std::ostringstream os;
      write_ensemble_csv(os, result.posterior);
      csv::write_atomic(config_.output_dir /
                        ("posterior_" + label + "_run" + std::to_string(run) + ".csv"), os.str());
    }
  } catch (const ForwardModelError & e) {
    record.failed = true;
    record.error = e.what();
  }
  return record;
}

ExperimentReport Experiment::run(bool write, std::ostream * log) const {
  ExperimentReport report;
  const bool grid = std::holds_alternative<GridFlowConfig>(config_.model);
  std::map<std::string, Eigen::VectorXd> nv_sums;
  std::map<std::string, int> nv_counts;
  for (const auto & entry : config_.localization) {
    nv_sums[entry.label] = Eigen::VectorXd::Zero(model_->n_params());
    nv_counts[entry.label] = 0;
  }

  for (int r = 0; r < config_.run_count; ++r) {
    const std::uint64_t seed = config_.base_seed + static_cast<std::uint64_t>(r);
    const Ensemble prior = sample_prior(config_.ensemble_size, RunSeed{seed});
    for (const auto & entry : config_.localization) {
      const auto start = std::chrono::steady_clock::now();
      RunRecord record = assimilate(entry.label, entry.policy, prior, r, seed,
                                    grid ? &nv_sums[entry.label] : nullptr);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (record.failed) {
        note(log, "run " + std::to_string(r) + " " + entry.label + " failed: " + record.error);
      } else {
        if (grid) ++nv_counts[entry.label];
        std::ostringstream msg;
        msg << "run " << r << " " << entry.label << " obj=" << record.final_step().obj_mean
            << " nv=" << record.final_step().nv << " (" << seconds << " s)";
        note(log, msg.str());
      }
      report.runs.push_back(std::move(record));
    }
  }
  if (config_.reference) {
    const auto & ref = *config_.reference;
    const Ensemble prior = sample_prior(ref.ensemble_size, RunSeed{ref.seed});
    LocalizationPolicy none;
    none.freeze = config_.freeze_tapers;
    RunRecord record = assimilate("reference", none, prior, 0, ref.seed, nullptr);
    note(log, record.failed ? "reference run failed: " + record.error : "reference run done");
    report.runs.push_back(std::move(record));
  }

  std::vector<std::string> labels;
  for (const auto & entry : config_.localization) labels.push_back(entry.label);
  if (config_.reference) labels.push_back("reference");
  for (const auto & label : labels) {
    const auto records = report.records(label);
    for (const char * metric : kFinalMetrics) {
      std::vector<double> values;
      for (const RunRecord * rec : records) {
        if (auto v = final_metric(rec->final_step(), metric)) values.push_back(*v);
      }
      if (!values.empty()) report.aggregates.push_back(aggregate_values(label, metric, values));
    }
  }

  if (!write) return report;

  // ---------------------------------------------------------------------------
  const auto & dir = config_.output_dir;
  csv::Table metrics_table({"label", "run", "seed", "ensemble_size", "step", "obj_mean", "nv",
                            "nv_dummy", "mean_offset", "n_eff", "chi", "obj_in_band",
                            "outside_fraction"});
  csv::Table diagnostics({"label", "run", "step", "metric", "value"});
  csv::Table histogram({"label", "run", "bin", "bin_low", "bin_high", "count"});
  csv::Table failures({"label", "run", "seed", "error"});
  for (const auto & rec : report.runs) {
    if (rec.failed) {
      std::string error = rec.error;
      std::replace(error.begin(), error.end(), ',', ';');
      std::replace(error.begin(), error.end(), '\n', ' ');
      failures.row().add(rec.label).add(rec.run).add(static_cast<unsigned long long>(rec.seed))
          .add(error);
      continue;
    }
    for (const auto & m : rec.steps) {
      metrics_table.row().add(rec.label).add(rec.run)
          .add(static_cast<unsigned long long>(rec.seed)).add(rec.ensemble_size).add(m.step)
          .add(m.obj_mean).add(m.nv).add(optional_cell(m.nv_dummy)).add(m.mean_offset)
          .add(optional_cell(m.n_eff)).add(optional_cell(m.chi)).add(m.obj_in_band)
          .add(optional_cell(m.outside_fraction));
      auto diag = [&](const char * name, const std::optional<double> & value) {
        if (value) diagnostics.row().add(rec.label).add(rec.run).add(m.step).add(name).add(*value);
      };
      diag("obj_mean", m.obj_mean);
      diag("nv", m.nv);
      diag("n_eff", m.n_eff);
      diag("chi", m.chi);
    }
    const int bins = static_cast<int>(rec.histogram.size());
    for (int b = 0; b < bins; ++b) {
      histogram.row().add(rec.label).add(rec.run).add(b)
          .add(static_cast<double>(b) / bins).add(static_cast<double>(b + 1) / bins)
          .add(static_cast<unsigned long long>(rec.histogram[b]));
    }
  }
  csv::Table summary({"label", "metric", "mean", "ci_low", "ci_high", "n"});
  for (const auto & a : report.aggregates) {
    summary.row().add(a.label).add(a.metric).add(a.mean).add(a.ci_low).add(a.ci_high).add(a.n);
  }
  csv::Table observations({"datum", "source", "kind", "time_index", "d_true", "d_obs", "sigma_e"});
  const auto data = model_->data_info();
  for (Index j = 0; j < obs_.size(); ++j) {
    observations.row().add(j).add(data[j].source).add(data[j].kind).add(data[j].time_index)
        .add(true_data_[j]).add(obs_.d_obs[j]).add(obs_.sigma_e[j]);
  }

  csv::write_atomic(dir / "metrics.csv", metrics_table.str());
  csv::write_atomic(dir / "diagnostics.csv", diagnostics.str());
  csv::write_atomic(dir / "histogram.csv", histogram.str());
  csv::write_atomic(dir / "summary.csv", summary.str());
  csv::write_atomic(dir / "observations.csv", observations.str());
  if (failures.rows() > 0) csv::write_atomic(dir / "failures.csv", failures.str());

  if (grid) {
    csv::Table nv_field({"label", "field", "i", "j", "k", "value"});
    const auto params = model_->parameter_info();
    for (const auto & entry : config_.localization) {
      const int count = nv_counts[entry.label];
      if (count == 0) continue;
      const Eigen::VectorXd mean = nv_sums[entry.label] / count;
      for (Index i = 0; i < mean.size(); ++i) {
        const GridCell & c = *params[i].cell;
        nv_field.row().add(entry.label).add(params[i].field).add(c.i).add(c.j).add(c.k)
            .add(mean[i]);
      }
    }
    csv::write_atomic(dir / "nv_field.csv", nv_field.str());
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig & config, std::ostream * log) {
  return Experiment(config).run(true, log);
}

// -----------------------------------------------------------------------------

SweepResult sweep_ensemble_size(const ExperimentConfig & config, const std::vector<int> & sizes,
                                std::ostream * log) {
  SweepResult result;
  csv::Table trend({"ensemble_size", "label", "obj_mean", "obj_ci_low", "obj_ci_high", "nv_mean",
                    "nv_ci_low", "nv_ci_high"});
  for (int size : sizes) {
    if (size < 3) throw ConfigError("sweep ensemble sizes must be at least 3");
    ExperimentConfig c = config;
    c.ensemble_size = size;
    c.reference.reset();
    c.output_dir = config.output_dir / ("ne" + std::to_string(size));
    note(log, "ensemble size " + std::to_string(size));
    ExperimentReport report = run_experiment(c, log);
    for (const auto & entry : c.localization) {
      const Aggregate * obj = report.aggregate(entry.label, "obj_mean");
      const Aggregate * nv = report.aggregate(entry.label, "nv");
      if (!obj || !nv) continue;
      trend.row().add(size).add(entry.label).add(obj->mean).add(obj->ci_low).add(obj->ci_high)
          .add(nv->mean).add(nv->ci_low).add(nv->ci_high);
    }
    result.values.push_back(size);
    result.reports.push_back(std::move(report));
  }
  csv::write_atomic(config.output_dir / "trend.csv", trend.str());
  return result;
}

SweepResult sweep_layers(const ExperimentConfig & config, const std::vector<int> & layer_counts,
                         std::ostream * log) {
  if (!std::holds_alternative<GridFlowConfig>(config.model)) {
    throw ConfigError("sweep-layers needs the grid_proxy model");
  }
  ExperimentConfig base = config;
  const bool has_none = std::any_of(base.localization.begin(), base.localization.end(),
      [](const LocalizationEntry & e) {return std::holds_alternative<taper::None>(e.policy.spec);});
  if (!has_none) {
    LocalizationEntry none{"none", LocalizationPolicy{}};
    none.policy.freeze = base.freeze_tapers;
    if (std::any_of(base.localization.begin(), base.localization.end(),
                    [](const LocalizationEntry & e) {return e.label == "none";})) {
      throw ConfigError("label 'none' is taken by a localized entry");
    }
    base.localization.insert(base.localization.begin(), none);
  }
  base.reference.reset();

  SweepResult result;
  csv::Table table({"label", "n_layers", "n_params", "n_eff", "chi"});
  for (int layers : layer_counts) {
    if (layers < 1) throw ConfigError("sweep layer counts must be at least 1");
    ExperimentConfig c = base;
    std::get<GridFlowConfig>(c.model).n_layers = layers;
    c.output_dir = config.output_dir / ("layers" + std::to_string(layers));
    note(log, "layer count " + std::to_string(layers));
    Experiment experiment(c);
    ExperimentReport report = experiment.run(true, log);
    for (const auto & entry : c.localization) {
      const Aggregate * n_eff = report.aggregate(entry.label, "n_eff");
      const Aggregate * chi = report.aggregate(entry.label, "chi");
      if (!n_eff || !chi) continue;
      table.row().add(entry.label).add(layers).add(experiment.model().n_params())
          .add(n_eff->mean).add(chi->mean);
    }
    result.values.push_back(layers);
    result.reports.push_back(std::move(report));
  }
  csv::write_atomic(config.output_dir / "neff_table.csv", table.str());
  return result;
}

csv::Table t0_table(const std::vector<int> & ne_list, const std::vector<double> & phi_list) {
  csv::Table table({"ne", "phi", "t0", "rho0"});
  for (int ne : ne_list) {
    for (double phi : phi_list) {
      table.row().add(ne).add(phi).add(significance::critical_t0(ne, phi))
          .add(significance::critical_rho(ne, phi));
    }
  }
  return table;
}

}  // namespace enloc
