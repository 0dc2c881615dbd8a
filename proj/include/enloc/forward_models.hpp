/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "enloc/ensemble.hpp"

namespace enloc {

/// d = g(m). Implementations are deterministic and safe to call concurrently.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual Index n_params() const = 0;
  virtual Index n_data() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const = 0;

  virtual std::vector<DatumInfo> data_info() const;
  virtual std::vector<ParameterInfo> parameter_info() const;
};

/// Evaluates every member (in parallel when available). A throwing or
/// non-finite evaluation is reported as ForwardModelError with the member index.
PredictedEnsemble evaluate_ensemble(const ForwardModel & model, const Ensemble & ens);

// -----------------------------------------------------------------------------
class LinearModel : public ForwardModel {
 public:
  explicit LinearModel(Eigen::MatrixXd g, std::vector<DatumInfo> data = {});

  Index n_params() const override {return g_.cols();}
  Index n_data() const override {return g_.rows();}
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const override;
  std::vector<DatumInfo> data_info() const override;

  const Eigen::MatrixXd & matrix() const {return g_;}

 private:
  Eigen::MatrixXd g_;
  std::vector<DatumInfo> data_;
};

// -----------------------------------------------------------------------------
struct ScalarToyConfig {
  int n_active = 15;
  int n_dummy = 5;
  int n_sources = 10;
  int n_times = 30;
  int n_features = 3;
  std::uint64_t seed = 7;
};

/// Scalar parameters m = [active | dummy]. Source s at time index n reports
///
///   d = b_s + sum_f a_sf tanh(s_n (w_sf . m_active) + c_sf),  s_n = 0.5 + (n + 1) / n_times
///
/// with a seeded sparse random feature map whose weights shrink with the
/// parameter index, so the active parameters have graded influence. The dummy
/// block never enters the response.
class ScalarToyModel : public ForwardModel {
 public:
  explicit ScalarToyModel(const ScalarToyConfig & config = {});

  Index n_params() const override {return config_.n_active + config_.n_dummy;}
  Index n_data() const override {return static_cast<Index>(config_.n_sources) * config_.n_times;}
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const override;
  std::vector<DatumInfo> data_info() const override;
  std::vector<ParameterInfo> parameter_info() const override;

  std::vector<Index> dummy_indices() const;
  std::vector<Index> active_indices() const;
  const ScalarToyConfig & config() const {return config_;}

 private:
  ScalarToyConfig config_;
  Eigen::VectorXd baseline_;   // per source
  Eigen::MatrixXd weights_;    // (n_sources * n_features) x n_active
  Eigen::VectorXd amplitude_;  // n_sources * n_features
  Eigen::VectorXd offset_;     // n_sources * n_features
};

// -----------------------------------------------------------------------------
struct Well {
  std::string name;
  bool injector = false;
  int i = 0;
  int j = 0;
};

struct GridFlowConfig {
  int nx = 60;
  int ny = 60;
  int n_layers = 1;
  int patterns_x = 3;  ///< five-spot patterns along x
  int patterns_y = 3;
  int n_times = 36;    ///< monthly reports
  double corridor_half_width = 1.0;  ///< gridblocks
  double time_scale = 0.45;          ///< months per (porosity x gridblock^2 / permeability)
  double ramp_width = 6.0;           ///< months
  double nominal_rate = 100.0;
  double min_porosity = 0.01;
};

/// Streamline-free flow proxy on an nx x ny x n_layers grid with porosity
/// and log-permeability fields (parameters ordered field, layer, j, i).
///
/// Producers sit at five-spot pattern centres, injectors at pattern corners.
/// Each producer-injector pair is joined by a straight corridor of cells
/// within corridor_half_width of the segment. For corridor c of length L:
///
///   kbar_c = layer average of the harmonic-mean permeability of the corridor
///   phi_c  = mean porosity of the corridor cells (floored at min_porosity)
///   T_c    = kbar_c / L
///   tbt_c  = time_scale * phi_c * L^2 / kbar_c
///
/// Producer water cut at month n:  sum_c (T_c / sum T) * S((n - tbt_c) / ramp_width)
/// Injector water rate at month n: nominal_rate * sum_c T_c * (1 + 0.3 S((n - tbt_c) / ramp_width))
/// where S is the standard logistic. Responses depend on corridor cells only.
class GridFlowProxy : public ForwardModel {
 public:
  explicit GridFlowProxy(const GridFlowConfig & config = {});

  static constexpr int kFields = 2;  // 0 = poro, 1 = logk
  static const char * field_name(int field);

  Index n_params() const override;
  Index n_data() const override;
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const override;
  std::vector<DatumInfo> data_info() const override;
  std::vector<ParameterInfo> parameter_info() const override;

  Index n_cells() const {return static_cast<Index>(config_.nx) * config_.ny * config_.n_layers;}
  Index param_index(int field, int i, int j, int k) const;

  const std::vector<Well> & wells() const {return wells_;}
  /// Planar cells (i, j) of every producer-injector corridor.
  const std::vector<std::vector<std::pair<int, int>>> & corridor_cells() const {return corridors_;}

  /// Sorted parameter rows that datum j depends on (corridor cells of the
  /// datum's well, every layer, both fields).
  std::vector<std::vector<Index>> sensitivity_mask() const;

  /// Breakthrough time of each corridor.
  Eigen::VectorXd breakthrough_times(const Eigen::Ref<const Eigen::VectorXd> & m) const;

  const GridFlowConfig & config() const {return config_;}

 private:
  struct Corridor {
    int producer = 0;  // index into wells_
    int injector = 0;
    double length = 1.0;
    std::vector<std::pair<int, int>> cells;
  };

  void corridor_properties(const Eigen::Ref<const Eigen::VectorXd> & m,
                           Eigen::VectorXd & transmissibility, Eigen::VectorXd & t_bt) const;

  GridFlowConfig config_;
  std::vector<Well> wells_;
  std::vector<Corridor> corridor_list_;
  std::vector<std::vector<std::pair<int, int>>> corridors_;
  std::vector<std::vector<int>> well_corridors_;  // per well
};

}  // namespace enloc
