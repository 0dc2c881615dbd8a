/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "enloc/ensemble.hpp"
#include "enloc/localization.hpp"
#include "enloc/observations.hpp"

namespace enloc::metrics {

inline constexpr int kHistogramBins = 20;

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const {return sum_ + carry_;}

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Mean over members of (1 / 2Nd) sum_j ((d_obs,j - d_j) / sigma_e,j)^2.
double objective_function(const PredictedEnsemble & pred, const ObservationSet & obs);

/// Per-member objective values (same normalization as objective_function).
Eigen::VectorXd objective_per_member(const PredictedEnsemble & pred, const ObservationSet & obs);

/// 0.5 <= obj <= 1.
bool in_objective_band(double obj);

/// Mean ratio of posterior to prior row variances over all rows.
double normalized_variance(const Ensemble & prior, const Ensemble & posterior);
/// Same over a non-empty subset of rows.
double normalized_variance(const Ensemble & prior, const Ensemble & posterior,
                           std::span<const Index> subset);

/// Per-row posterior / prior variance ratio (NaN where the prior is constant).
Eigen::VectorXd variance_ratio_per_row(const Ensemble & prior, const Ensemble & posterior);

struct MeanOffset {
  double value = 0.0;
  /// Rows skipped because their prior standard deviation is zero.
  Index excluded = 0;
};

/// Mean over rows of |mean_post - mean_prior| / std_prior.
MeanOffset mean_offset(const Ensemble & prior, const Ensemble & posterior);

/// (1 / Nd) sum_j sum_i r_ij, accumulated block by block.
double n_eff(const TaperRows & taper, Index n_params, Index n_data,
             Index block_width = kDefaultBlockWidth);

double chi(double n_eff, Index n_params);

/// Counts of taper values in equal-width bins on [0, 1]; the last bin is
/// closed on the right.
std::vector<std::uint64_t> taper_histogram(const TaperRows & taper, Index n_params, Index n_data,
                                           int bins = kHistogramBins,
                                           Index block_width = kDefaultBlockWidth);

struct TaperSummary {
  double n_eff = 0.0;
  double chi = 0.0;
  std::vector<std::uint64_t> histogram;
};

/// n_eff, chi and histogram from a single pass over the taper.
TaperSummary summarize_taper(const TaperRows & taper, Index n_params, Index n_data,
                             int bins = kHistogramBins, Index block_width = kDefaultBlockWidth);

/// Share of the total taper mass on pairs (i, j) with i not in allowed[j].
/// Each allowed[j] must be sorted.
double outside_mass_fraction(const TaperRows & taper, Index n_params,
                             const std::vector<std::vector<Index>> & allowed,
                             Index block_width = kDefaultBlockWidth);

/// Same with shared sets: datum j uses allowed[set_of_datum[j]].
double outside_mass_fraction(const TaperRows & taper, Index n_params,
                             const std::vector<std::vector<Index>> & allowed,
                             const std::vector<std::size_t> & set_of_datum,
                             Index block_width = kDefaultBlockWidth);

struct MetricReport {
  double obj_mean = 0.0;
  double nv = 0.0;
  std::optional<double> nv_dummy;
  double mean_offset = 0.0;
  double n_eff = 0.0;
  double chi = 0.0;
  std::vector<std::uint64_t> taper_histogram;
  bool obj_in_band = false;
};

}  // namespace enloc::metrics
