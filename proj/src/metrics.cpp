/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "enloc/error.hpp"

namespace enloc::metrics {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

// -----------------------------------------------------------------------------

Eigen::VectorXd objective_per_member(const PredictedEnsemble & pred, const ObservationSet & obs) {
  obs.validate();
  if (pred.n_data() != obs.size()) throw DimensionMismatch("predictions and observations differ");
  const Eigen::MatrixXd scaled =
      (pred.values().colwise() - obs.d_obs).array().colwise() / obs.sigma_e.array();
  return scaled.colwise().squaredNorm().transpose() / (2.0 * pred.n_data());
}

double objective_function(const PredictedEnsemble & pred, const ObservationSet & obs) {
  return objective_per_member(pred, obs).mean();
}

bool in_objective_band(double obj) {
  return obj >= 0.5 && obj <= 1.0;
}

// -----------------------------------------------------------------------------

namespace {

void require_same_shape(const Ensemble & prior, const Ensemble & posterior) {
  if (prior.n_params() != posterior.n_params()) {
    throw DimensionMismatch("prior and posterior differ in parameter count");
  }
}

}  // namespace

Eigen::VectorXd variance_ratio_per_row(const Ensemble & prior, const Ensemble & posterior) {
  require_same_shape(prior, posterior);
  const Eigen::VectorXd v0 = ensemble_variance_per_row(prior);
  const Eigen::VectorXd v1 = ensemble_variance_per_row(posterior);
  Eigen::VectorXd ratio(v0.size());
  for (Index i = 0; i < v0.size(); ++i) {
    ratio[i] = v0[i] > 0.0 ? v1[i] / v0[i] : std::numeric_limits<double>::quiet_NaN();
  }
  return ratio;
}

double normalized_variance(const Ensemble & prior, const Ensemble & posterior,
                           std::span<const Index> subset) {
  if (subset.empty()) throw InvalidArgument("normalized variance over an empty subset");
  const Eigen::VectorXd ratio = variance_ratio_per_row(prior, posterior);
  CompensatedSum sum;
  for (Index i : subset) {
    if (i < 0 || i >= ratio.size()) throw InvalidArgument("subset index out of range");
    if (std::isnan(ratio[i])) {
      throw InvalidArgument("zero prior variance in row " + std::to_string(i));
    }
    sum.add(ratio[i]);
  }
  return sum.value() / subset.size();
}

double normalized_variance(const Ensemble & prior, const Ensemble & posterior) {
  std::vector<Index> all(prior.n_params());
  for (Index i = 0; i < prior.n_params(); ++i) all[i] = i;
  return normalized_variance(prior, posterior, all);
}

MeanOffset mean_offset(const Ensemble & prior, const Ensemble & posterior) {
  require_same_shape(prior, posterior);
  const Eigen::VectorXd m0 = prior.values().rowwise().mean();
  const Eigen::VectorXd m1 = posterior.values().rowwise().mean();
  const Eigen::VectorXd v0 = ensemble_variance_per_row(prior);
  MeanOffset out;
  CompensatedSum sum;
  Index used = 0;
  for (Index i = 0; i < m0.size(); ++i) {
    if (!(v0[i] > 0.0)) {
      ++out.excluded;
      continue;
    }
    sum.add(std::abs(m1[i] - m0[i]) / std::sqrt(v0[i]));
    ++used;
  }
  out.value = used > 0 ? sum.value() / used : 0.0;
  return out;
}

// -----------------------------------------------------------------------------

namespace {

void check_taper_value(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("taper value outside [0, 1]");
}

}  // namespace

TaperSummary summarize_taper(const TaperRows & taper, Index n_params, Index n_data, int bins,
                             Index block_width) {
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
  if (n_params <= 0) throw InvalidArgument("taper summary needs n_params > 0");
  TaperSummary summary;
  summary.histogram.assign(bins, 0);
  CompensatedSum total;
  Eigen::MatrixXd block_values;
  for (const auto & block : partition_rows(n_params, block_width)) {
    block_values.resize(block.width, n_data);
    taper(block, block_values);
    for (Index j = 0; j < n_data; ++j) {
      for (Index i = 0; i < block.width; ++i) {
        const double r = block_values(i, j);
        check_taper_value(r);
        total.add(r);
        const int bin = std::min(static_cast<int>(r * bins), bins - 1);
        ++summary.histogram[bin];
      }
    }
  }
  summary.n_eff = n_data > 0 ? total.value() / n_data : 0.0;
  summary.chi = chi(summary.n_eff, n_params);
  return summary;
}

double n_eff(const TaperRows & taper, Index n_params, Index n_data, Index block_width) {
  return summarize_taper(taper, n_params, n_data, kHistogramBins, block_width).n_eff;
}

double chi(double n_eff, Index n_params) {
  if (n_params <= 0) throw InvalidArgument("chi needs n_params > 0");
  return n_eff / static_cast<double>(n_params);
}

std::vector<std::uint64_t> taper_histogram(const TaperRows & taper, Index n_params, Index n_data,
                                           int bins, Index block_width) {
  return summarize_taper(taper, n_params, n_data, bins, block_width).histogram;
}

double outside_mass_fraction(const TaperRows & taper, Index n_params,
                             const std::vector<std::vector<Index>> & allowed,
                             Index block_width) {
  std::vector<std::size_t> identity(allowed.size());
  for (std::size_t j = 0; j < identity.size(); ++j) identity[j] = j;
  return outside_mass_fraction(taper, n_params, allowed, identity, block_width);
}

double outside_mass_fraction(const TaperRows & taper, Index n_params,
                             const std::vector<std::vector<Index>> & allowed,
                             const std::vector<std::size_t> & set_of_datum,
                             Index block_width) {
  const Index n_data = static_cast<Index>(set_of_datum.size());
  for (std::size_t s : set_of_datum) {
    if (s >= allowed.size()) throw InvalidArgument("datum refers to a missing allowed set");
  }
  CompensatedSum total;
  CompensatedSum outside;
  Eigen::MatrixXd block_values;
  for (const auto & block : partition_rows(n_params, block_width)) {
    block_values.resize(block.width, n_data);
    taper(block, block_values);
    for (Index j = 0; j < n_data; ++j) {
      const auto & inside = allowed[set_of_datum[j]];
      auto it = std::lower_bound(inside.begin(), inside.end(), block.start);
      for (Index i = 0; i < block.width; ++i) {
        const double r = block_values(i, j);
        check_taper_value(r);
        total.add(r);
        const Index row = block.start + i;
        while (it != inside.end() && *it < row) ++it;
        if (it == inside.end() || *it != row) outside.add(r);
      }
    }
  }
  const double mass = total.value();
  return mass > 0.0 ? outside.value() / mass : 0.0;
}

}  // namespace enloc::metrics
