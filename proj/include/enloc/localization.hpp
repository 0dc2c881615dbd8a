/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "enloc/ensemble.hpp"
#include "enloc/significance.hpp"
#include "enloc/taper.hpp"

namespace enloc {

/// Fills a width x Nd block of taper coefficients for the given parameter rows.
using TaperRows = std::function<void(const RowBlock &, Eigen::Ref<Eigen::MatrixXd>)>;

inline constexpr Index kDefaultBlockWidth = 1024;

struct LocalizationPolicy {
  taper::TaperSpec spec = taper::None{};
  /// Threshold rule for the power-law and logistic families. Empty keeps the
  /// t0 written in the spec.
  std::optional<significance::T0Strategy> t0_strategy;
  /// Compute tapers once from the prior ensemble and reuse them every step.
  bool freeze = true;
};

/// Taper coefficients for every (parameter, datum) pair of one ensemble.
///
/// Correlation-based tapers are evaluated on demand, block by block, from the
/// ensemble and predictions captured at construction. Pairs whose correlation
/// is undefined (a constant row) get taper 0.
class Localizer {
 public:
  Localizer(const LocalizationPolicy & policy, const Ensemble & ens,
            const PredictedEnsemble & pred, Index block_width = kDefaultBlockWidth);
  ~Localizer();
  Localizer(Localizer &&) noexcept;
  Localizer & operator=(Localizer &&) noexcept;

  void rows(const RowBlock & block, Eigen::Ref<Eigen::MatrixXd> out) const;
  Eigen::MatrixXd rows(const RowBlock & block) const;

  /// Provider bound to this object; it must not outlive it.
  TaperRows provider() const;

  Index n_params() const {return n_params_;}
  Index n_data() const {return n_data_;}

  /// Per-datum t0 after applying the strategy (empty for families without t0).
  const std::vector<double> & datum_t0() const {return datum_t0_;}

 private:
  void resolve_thresholds(Index block_width);

  LocalizationPolicy policy_;
  Index n_params_ = 0;
  Index n_data_ = 0;
  int n_members_ = 0;
  std::unique_ptr<const Ensemble> ens_;
  std::unique_ptr<const PredictedEnsemble> pred_;
  std::unique_ptr<const CorrelationEngine> engine_;
  std::vector<double> datum_t0_;
  std::vector<taper::TaperSpec> datum_spec_;
};

/// Taper filled with one value.
TaperRows constant_taper(double value);

/// Taper read from an explicit Nm x Nd matrix (kept by reference).
TaperRows dense_taper(const Eigen::MatrixXd & taper);

/// Groups data by (source, kind), in order of first appearance.
std::vector<std::vector<Index>> group_data_by_source(const std::vector<DatumInfo> & data);

}  // namespace enloc
