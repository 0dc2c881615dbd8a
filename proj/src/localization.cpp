/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/localization.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "enloc/error.hpp"

namespace enloc {

namespace {

bool has_threshold(const taper::TaperSpec & spec) {
  return std::holds_alternative<taper::PowerLaw>(spec) ||
         std::holds_alternative<taper::Logistic>(spec);
}

double spec_t0(const taper::TaperSpec & spec) {
  if (const auto * p = std::get_if<taper::PowerLaw>(&spec)) return p->t0;
  return std::get<taper::Logistic>(spec).t0;
}

// Keeps degenerate percentile thresholds usable by the t0 families.
constexpr double kMinT0 = 1e-6;

}  // namespace

std::vector<std::vector<Index>> group_data_by_source(const std::vector<DatumInfo> & data) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::vector<Index>> groups;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto key = std::make_pair(data[j].source, data[j].kind);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.emplace_back();
    }
    groups[it->second].push_back(static_cast<Index>(j));
  }
  return groups;
}

// -----------------------------------------------------------------------------

Localizer::Localizer(const LocalizationPolicy & policy, const Ensemble & ens,
                     const PredictedEnsemble & pred, Index block_width)
  : policy_(policy), n_params_(ens.n_params()), n_data_(pred.n_data()),
    n_members_(static_cast<int>(ens.n_members()))
{
  taper::validate(policy_.spec);
  if (pred.n_members() != ens.n_members()) {
    throw DimensionMismatch("ensemble and predictions differ in member count");
  }
  if (std::holds_alternative<taper::None>(policy_.spec)) return;

  if (std::holds_alternative<taper::DistanceGC>(policy_.spec)) {
    for (const auto & p : ens.parameters()) {
      if (!p.cell) throw InvalidArgument("distance taper needs grid coordinates for every parameter");
    }
    for (const auto & info : pred.data()) {
      if (!info.location) throw InvalidArgument("distance taper needs a location for every datum");
    }
    ens_ = std::make_unique<const Ensemble>(ens);
    pred_ = std::make_unique<const PredictedEnsemble>(pred);
    return;
  }

  if (n_members_ < 3) throw InvalidEnsembleSize("correlation-based tapers require n_e >= 3");
  ens_ = std::make_unique<const Ensemble>(ens);
  pred_ = std::make_unique<const PredictedEnsemble>(pred);
  engine_ = std::make_unique<const CorrelationEngine>(*ens_, *pred_);
  datum_spec_.assign(n_data_, policy_.spec);
  resolve_thresholds(block_width);
}

Localizer::~Localizer() = default;
Localizer::Localizer(Localizer &&) noexcept = default;
Localizer & Localizer::operator=(Localizer &&) noexcept = default;

void Localizer::resolve_thresholds(Index block_width) {
  if (!has_threshold(policy_.spec)) return;
  datum_t0_.assign(n_data_, spec_t0(policy_.spec));
  if (policy_.t0_strategy) {
    const auto & strategy = *policy_.t0_strategy;
    if (const auto * f = std::get_if<significance::FixedT0>(&strategy)) {
      datum_t0_.assign(n_data_, f->t0);
    } else if (const auto * s = std::get_if<significance::StudentT0>(&strategy)) {
      datum_t0_.assign(n_data_, significance::critical_t0(n_members_, s->phi));
    } else {
      const double p = std::get<significance::PercentileT0>(strategy).p;
      const auto groups = group_data_by_source(pred_->data());
      std::vector<std::size_t> group_of(n_data_);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        for (Index j : groups[g]) group_of[j] = g;
      }
      // Non-finite t (|rho| == 1) and undefined pairs are left out of the pool.
      std::vector<std::vector<double>> pool(groups.size());
      for (const auto & block : partition_rows(n_params_, block_width)) {
        const Eigen::MatrixXd corr = engine_->block(block);
        for (Index j = 0; j < n_data_; ++j) {
          auto & values = pool[group_of[j]];
          for (Index i = 0; i < block.width; ++i) {
            const double rho = corr(i, j);
            if (std::isnan(rho)) continue;
            const double t = taper::CorrelationStats::from(rho, n_members_).t;
            if (std::isfinite(t)) values.push_back(t);
          }
        }
      }
      for (std::size_t g = 0; g < groups.size(); ++g) {
        double t0 = 1.0;
        if (!pool[g].empty()) t0 = std::max(significance::adaptive_t0(pool[g], p), kMinT0);
        for (Index j : groups[g]) datum_t0_[j] = t0;
      }
    }
  }
  for (Index j = 0; j < n_data_; ++j) datum_spec_[j] = taper::with_t0(policy_.spec, datum_t0_[j]);
}

void Localizer::rows(const RowBlock & block, Eigen::Ref<Eigen::MatrixXd> out) const {
  if (block.start < 0 || block.width < 0 || block.start + block.width > n_params_) {
    throw InvalidArgument("row block outside the parameter range");
  }
  if (out.rows() != block.width || out.cols() != n_data_) {
    throw DimensionMismatch("taper block has the wrong shape");
  }
  if (std::holds_alternative<taper::None>(policy_.spec)) {
    out.setOnes();
    return;
  }
  if (const auto * d = std::get_if<taper::DistanceGC>(&policy_.spec)) {
    const auto & params = ens_->parameters();
    const auto & data = pred_->data();
    for (Index j = 0; j < n_data_; ++j) {
      const auto [x, y] = *data[j].location;
      for (Index i = 0; i < block.width; ++i) {
        const GridCell & c = *params[block.start + i].cell;
        out(i, j) = taper::taper_distance(c.i - x, c.j - y, d->len_major, d->len_minor,
                                          d->angle_deg);
      }
    }
    return;
  }
  engine_->block(block, out);
  for (Index j = 0; j < n_data_; ++j) {
    const auto & spec = datum_spec_[j];
    for (Index i = 0; i < block.width; ++i) {
      const double rho = out(i, j);
      if (std::isnan(rho)) {
        out(i, j) = 0.0;
      } else {
        taper::CorrelationStats stats;
        stats.rho_hat = rho;
        stats.n_e = n_members_;
        out(i, j) = taper::evaluate_taper(spec, stats);
      }
    }
  }
}

Eigen::MatrixXd Localizer::rows(const RowBlock & block) const {
  Eigen::MatrixXd out(block.width, n_data_);
  rows(block, out);
  return out;
}

TaperRows Localizer::provider() const {
  return [this](const RowBlock & block, Eigen::Ref<Eigen::MatrixXd> out) {rows(block, out);};
}

// -----------------------------------------------------------------------------

TaperRows constant_taper(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("taper values must lie in [0, 1]");
  return [value](const RowBlock &, Eigen::Ref<Eigen::MatrixXd> out) {out.setConstant(value);};
}

TaperRows dense_taper(const Eigen::MatrixXd & taper) {
  return [&taper](const RowBlock & block, Eigen::Ref<Eigen::MatrixXd> out) {
    out = taper.middleRows(block.start, block.width);
  };
}

}  // namespace enloc
