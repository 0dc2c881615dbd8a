/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/forward_models.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <utility>

#include "enloc/error.hpp"
#include "enloc/random.hpp"

namespace enloc {

std::vector<DatumInfo> ForwardModel::data_info() const {
  std::vector<DatumInfo> data(n_data());
  for (Index j = 0; j < n_data(); ++j) {
    data[j].source = "d" + std::to_string(j);
    data[j].kind = "y";
  }
  return data;
}

std::vector<ParameterInfo> ForwardModel::parameter_info() const {
  std::vector<ParameterInfo> params(n_params());
  for (Index i = 0; i < n_params(); ++i) params[i].name = "m" + std::to_string(i);
  return params;
}

PredictedEnsemble evaluate_ensemble(const ForwardModel & model, const Ensemble & ens) {
  if (ens.n_params() != model.n_params()) {
    throw DimensionMismatch("ensemble does not match the model parameter count");
  }
  const long n_members = static_cast<long>(ens.n_members());
  Eigen::MatrixXd out(model.n_data(), n_members);
  // Lowest failing member wins, so the reported error does not depend on scheduling.
  long failed = n_members;
  std::string message;
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n_members; ++k) {
    std::string what;
    try {
      const Eigen::VectorXd d = model.evaluate(ens.values().col(k));
      if (d.size() != model.n_data()) {
        what = "wrong output length";
      } else if (!d.allFinite()) {
        what = "non-finite output";
      } else {
        out.col(k) = d;
      }
    } catch (const std::exception & e) {
      what = e.what();
    }
    if (!what.empty()) {
#pragma omp critical(enloc_model_failure)
      if (k < failed) {
        failed = k;
        message = what;
      }
    }
  }
  if (failed < n_members) throw ForwardModelError(static_cast<std::size_t>(failed), message);
  return PredictedEnsemble(std::move(out), model.data_info());
}

// -----------------------------------------------------------------------------

LinearModel::LinearModel(Eigen::MatrixXd g, std::vector<DatumInfo> data)
  : g_(std::move(g)), data_(std::move(data))
{
  if (!g_.allFinite()) throw InvalidArgument("linear model matrix must be finite");
  if (!data_.empty() && static_cast<Index>(data_.size()) != g_.rows()) {
    throw DimensionMismatch("datum metadata does not match the model");
  }
}

Eigen::VectorXd LinearModel::evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const {
  if (m.size() != g_.cols()) throw DimensionMismatch("parameter vector has the wrong length");
  return g_ * m;
}

std::vector<DatumInfo> LinearModel::data_info() const {
  return data_.empty() ? ForwardModel::data_info() : data_;
}

// -----------------------------------------------------------------------------

ScalarToyModel::ScalarToyModel(const ScalarToyConfig & config)
  : config_(config)
{
  if (config_.n_active < 1 || config_.n_dummy < 0 || config_.n_sources < 1 ||
      config_.n_times < 1 || config_.n_features < 1) {
    throw InvalidArgument("scalar toy dimensions must be positive");
  }
  const int n_rows = config_.n_sources * config_.n_features;
  auto gen = RunSeed{config_.seed}.stream(StreamPurpose::ModelSetup, 0, 0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  weights_ = Eigen::MatrixXd::Zero(n_rows, config_.n_active);
  amplitude_.resize(n_rows);
  offset_.resize(n_rows);
  baseline_.resize(config_.n_sources);
  for (int r = 0; r < n_rows; ++r) {
    for (int p = 0; p < config_.n_active; ++p) {
      const double draw = normal(gen);
      if (uniform(gen) < 0.5) {
        const double impact = std::exp(-2.0 * p / config_.n_active);
        weights_(r, p) = draw * impact;
      }
    }
    // Every feature sees at least one parameter.
    if (weights_.row(r).squaredNorm() == 0.0) {
      weights_(r, r % config_.n_active) = 1.0;
    }
    weights_.row(r).normalize();
    amplitude_[r] = 0.5 + uniform(gen);
    offset_[r] = uniform(gen) - 0.5;
  }
  for (int s = 0; s < config_.n_sources; ++s) {
    baseline_[s] = 2.0 + 2.0 * uniform(gen) +
                   amplitude_.segment(s * config_.n_features, config_.n_features).sum();
  }
}

Eigen::VectorXd ScalarToyModel::evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const {
  if (m.size() != n_params()) throw DimensionMismatch("parameter vector has the wrong length");
  const Eigen::VectorXd z = weights_ * m.head(config_.n_active);
  Eigen::VectorXd d(n_data());
  for (int s = 0; s < config_.n_sources; ++s) {
    for (int n = 0; n < config_.n_times; ++n) {
      const double scale = 0.5 + (n + 1.0) / config_.n_times;
      double value = baseline_[s];
      for (int f = 0; f < config_.n_features; ++f) {
        const int r = s * config_.n_features + f;
        value += amplitude_[r] * std::tanh(scale * z[r] + offset_[r]);
      }
      d[static_cast<Index>(s) * config_.n_times + n] = value;
    }
  }
  return d;
}

std::vector<DatumInfo> ScalarToyModel::data_info() const {
  std::vector<DatumInfo> data;
  data.reserve(n_data());
  for (int s = 0; s < config_.n_sources; ++s) {
    for (int n = 0; n < config_.n_times; ++n) {
      DatumInfo info;
      info.source = "S" + std::to_string(s + 1);
      info.kind = "y";
      info.time_index = n;
      data.push_back(std::move(info));
    }
  }
  return data;
}

std::vector<ParameterInfo> ScalarToyModel::parameter_info() const {
  std::vector<ParameterInfo> params(n_params());
  for (int p = 0; p < config_.n_active; ++p) params[p].name = "a" + std::to_string(p + 1);
  for (int p = 0; p < config_.n_dummy; ++p) {
    params[config_.n_active + p].name = "dummy" + std::to_string(p + 1);
  }
  return params;
}

std::vector<Index> ScalarToyModel::dummy_indices() const {
  std::vector<Index> out;
  for (int p = 0; p < config_.n_dummy; ++p) out.push_back(config_.n_active + p);
  return out;
}

std::vector<Index> ScalarToyModel::active_indices() const {
  std::vector<Index> out;
  for (int p = 0; p < config_.n_active; ++p) out.push_back(p);
  return out;
}

// -----------------------------------------------------------------------------

namespace {

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double s = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(px - (ax + s * vx), py - (ay + s * vy));
}

int grid_line(int a, int patterns, int n) {
  return std::min(static_cast<int>(std::lround(static_cast<double>(a) * n / patterns)), n - 1);
}

double logistic(double x) {
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

const char * GridFlowProxy::field_name(int field) {
  return field == 0 ? "poro" : "logk";
}

GridFlowProxy::GridFlowProxy(const GridFlowConfig & config)
  : config_(config)
{
  if (config_.nx < 2 || config_.ny < 2 || config_.n_layers < 1) {
    throw InvalidArgument("grid needs nx, ny >= 2 and at least one layer");
  }
  if (config_.patterns_x < 1 || config_.patterns_y < 1 || config_.n_times < 1) {
    throw InvalidArgument("grid proxy needs at least one pattern and one report time");
  }
  if (!(config_.corridor_half_width > 0.0 && config_.time_scale > 0.0 &&
        config_.ramp_width > 0.0 && config_.min_porosity > 0.0)) {
    throw InvalidArgument("grid proxy scales must be positive");
  }

  const int px = config_.patterns_x;
  const int py = config_.patterns_y;
  for (int b = 0; b < py; ++b) {
    for (int a = 0; a < px; ++a) {
      Well w;
      w.name = "P" + std::to_string(wells_.size() + 1);
      w.i = std::min(static_cast<int>((a + 0.5) * config_.nx / px), config_.nx - 1);
      w.j = std::min(static_cast<int>((b + 0.5) * config_.ny / py), config_.ny - 1);
      wells_.push_back(w);
    }
  }
  const int n_producers = static_cast<int>(wells_.size());
  for (int b = 0; b <= py; ++b) {
    for (int a = 0; a <= px; ++a) {
      Well w;
      w.name = "I" + std::to_string(wells_.size() - n_producers + 1);
      w.injector = true;
      w.i = grid_line(a, px, config_.nx);
      w.j = grid_line(b, py, config_.ny);
      wells_.push_back(w);
    }
  }

  well_corridors_.resize(wells_.size());
  for (int b = 0; b < py; ++b) {
    for (int a = 0; a < px; ++a) {
      const int producer = b * px + a;
      for (int cb = 0; cb <= 1; ++cb) {
        for (int ca = 0; ca <= 1; ++ca) {
          const int injector = n_producers + (b + cb) * (px + 1) + (a + ca);
          Corridor c;
          c.producer = producer;
          c.injector = injector;
          const Well & p = wells_[producer];
          const Well & q = wells_[injector];
          c.length = std::max(1.0, std::hypot(p.i - q.i, p.j - q.j));
          for (int j = std::min(p.j, q.j) - 2; j <= std::max(p.j, q.j) + 2; ++j) {
            for (int i = std::min(p.i, q.i) - 2; i <= std::max(p.i, q.i) + 2; ++i) {
              if (i < 0 || j < 0 || i >= config_.nx || j >= config_.ny) continue;
              if (segment_distance(i, j, p.i, p.j, q.i, q.j) <= config_.corridor_half_width) {
                c.cells.emplace_back(i, j);
              }
            }
          }
          const int id = static_cast<int>(corridor_list_.size());
          well_corridors_[producer].push_back(id);
          well_corridors_[injector].push_back(id);
          corridors_.push_back(c.cells);
          corridor_list_.push_back(std::move(c));
        }
      }
    }
  }
}

Index GridFlowProxy::n_params() const {
  return kFields * n_cells();
}

Index GridFlowProxy::n_data() const {
  return static_cast<Index>(wells_.size()) * config_.n_times;
}

Index GridFlowProxy::param_index(int field, int i, int j, int k) const {
  return ((static_cast<Index>(field) * config_.n_layers + k) * config_.ny + j) * config_.nx + i;
}

void GridFlowProxy::corridor_properties(const Eigen::Ref<const Eigen::VectorXd> & m,
                                        Eigen::VectorXd & transmissibility,
                                        Eigen::VectorXd & t_bt) const {
  if (m.size() != n_params()) throw DimensionMismatch("parameter vector has the wrong length");
  const Index n_corridors = static_cast<Index>(corridor_list_.size());
  transmissibility.resize(n_corridors);
  t_bt.resize(n_corridors);
  for (Index c = 0; c < n_corridors; ++c) {
    const Corridor & corridor = corridor_list_[c];
    const double n = static_cast<double>(corridor.cells.size());
    double k_sum = 0.0;
    double phi_sum = 0.0;
    for (int k = 0; k < config_.n_layers; ++k) {
      double inverse_sum = 0.0;
      for (const auto & [i, j] : corridor.cells) {
        inverse_sum += std::exp(-m[param_index(1, i, j, k)]);
        phi_sum += m[param_index(0, i, j, k)];
      }
      k_sum += n / inverse_sum;
    }
    const double kbar = k_sum / config_.n_layers;
    const double phi = std::max(phi_sum / (n * config_.n_layers), config_.min_porosity);
    transmissibility[c] = kbar / corridor.length;
    t_bt[c] = config_.time_scale * phi * corridor.length * corridor.length / kbar;
  }
}

Eigen::VectorXd GridFlowProxy::breakthrough_times(const Eigen::Ref<const Eigen::VectorXd> & m) const {
  Eigen::VectorXd trans;
  Eigen::VectorXd t_bt;
  corridor_properties(m, trans, t_bt);
  return t_bt;
}

Eigen::VectorXd GridFlowProxy::evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const {
  Eigen::VectorXd trans;
  Eigen::VectorXd t_bt;
  corridor_properties(m, trans, t_bt);
  Eigen::VectorXd d(n_data());
  for (std::size_t w = 0; w < wells_.size(); ++w) {
    const auto & ids = well_corridors_[w];
    double trans_sum = 0.0;
    for (int c : ids) trans_sum += trans[c];
    for (int n = 0; n < config_.n_times; ++n) {
      const double time = n + 1.0;
      double value = 0.0;
      for (int c : ids) {
        const double s = logistic((time - t_bt[c]) / config_.ramp_width);
        if (wells_[w].injector) {
          value += trans[c] * (1.0 + 0.3 * s);
        } else {
          value += trans[c] / trans_sum * s;
        }
      }
      if (wells_[w].injector) value *= config_.nominal_rate;
      d[static_cast<Index>(w) * config_.n_times + n] = value;
    }
  }
  return d;
}

std::vector<DatumInfo> GridFlowProxy::data_info() const {
  std::vector<DatumInfo> data;
  data.reserve(n_data());
  for (const Well & w : wells_) {
    for (int n = 0; n < config_.n_times; ++n) {
      DatumInfo info;
      info.source = w.name;
      info.kind = w.injector ? "wir" : "wct";
      info.time_index = n;
      info.location = std::make_pair(static_cast<double>(w.i), static_cast<double>(w.j));
      data.push_back(std::move(info));
    }
  }
  return data;
}

std::vector<ParameterInfo> GridFlowProxy::parameter_info() const {
  std::vector<ParameterInfo> params(n_params());
  for (int f = 0; f < kFields; ++f) {
    for (int k = 0; k < config_.n_layers; ++k) {
      for (int j = 0; j < config_.ny; ++j) {
        for (int i = 0; i < config_.nx; ++i) {
          auto & p = params[param_index(f, i, j, k)];
          p.field = field_name(f);
          p.cell = GridCell{i, j, k};
          p.name = parameter_id(p, 0);
        }
      }
    }
  }
  return params;
}

std::vector<std::vector<Index>> GridFlowProxy::sensitivity_mask() const {
  std::vector<std::vector<Index>> masks;
  masks.reserve(n_data());
  for (std::size_t w = 0; w < wells_.size(); ++w) {
    std::vector<Index> rows;
    for (int c : well_corridors_[w]) {
      for (const auto & [i, j] : corridor_list_[c].cells) {
        for (int f = 0; f < kFields; ++f) {
          for (int k = 0; k < config_.n_layers; ++k) rows.push_back(param_index(f, i, j, k));
        }
      }
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (int n = 0; n < config_.n_times; ++n) masks.push_back(rows);
  }
  return masks;
}

}  // namespace enloc
