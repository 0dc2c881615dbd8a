/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/smoother.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>

#include "enloc/error.hpp"
#include "enloc/metrics.hpp"

namespace enloc {

MdaSchedule MdaSchedule::uniform(int n_a) {
  if (n_a < 1) throw InvalidArgument("schedule needs at least one step");
  return MdaSchedule{std::vector<double>(n_a, static_cast<double>(n_a))};
}

void MdaSchedule::validate() const {
  if (alphas.empty()) throw InvalidArgument("schedule needs at least one step");
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("inflation factors must be positive");
    sum += 1.0 / a;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw InvalidArgument("inflation factors must satisfy sum(1/alpha) = 1");
  }
}

// -----------------------------------------------------------------------------

Eigen::MatrixXd perturb_observations(const ObservationSet & obs, double alpha, Index n_members,
                                     const RunSeed & seed, std::uint64_t step) {
  obs.validate();
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  const Index nd = obs.size();
  const double scale = std::sqrt(alpha);
  Eigen::MatrixXd out(nd, n_members);
  Eigen::VectorXd e(nd);
  for (Index k = 0; k < n_members; ++k) {
    auto gen = seed.stream(StreamPurpose::Perturbation, step, static_cast<std::uint64_t>(k));
    fill_standard_normal(gen, e);
    out.col(k) = obs.d_obs + scale * obs.sigma_e.cwiseProduct(e);
  }
  return out;
}

// -----------------------------------------------------------------------------

KalmanGain::KalmanGain(const Ensemble & ens, const PredictedEnsemble & pred,
                       const ObservationSet & obs, double alpha)
  : ens_(ens)
{
  obs.validate();
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (pred.n_members() != ens.n_members()) {
    throw DimensionMismatch("ensemble and predictions differ in member count");
  }
  if (pred.n_data() != obs.size()) throw DimensionMismatch("predictions and observations differ");
  if (!pred.values().allFinite()) throw InvalidArgument("predictions contain non-finite values");

  const double denom = ens.n_members() - 1.0;
  mean_ = ens.values().rowwise().mean();
  const Eigen::MatrixXd dd = pred.values().colwise() - pred.values().rowwise().mean();
  Eigen::MatrixXd s = dd * dd.transpose() / denom;
  s.diagonal() += alpha * obs.sigma_e.array().square().matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("innovation covariance is not positive definite");
  }
  weights_ = llt.solve(dd).transpose() / denom;
}

Eigen::MatrixXd KalmanGain::block(const RowBlock & rows) const {
  if (rows.start < 0 || rows.width < 0 || rows.start + rows.width > ens_.n_params()) {
    throw InvalidArgument("row block outside the parameter range");
  }
  const Eigen::MatrixXd dm = ens_.values().middleRows(rows.start, rows.width).colwise() -
                             mean_.segment(rows.start, rows.width);
  return dm * weights_;
}

Eigen::MatrixXd kalman_gain_block(const Ensemble & ens, const PredictedEnsemble & pred,
                                  const ObservationSet & obs, double alpha, const RowBlock & rows) {
  return KalmanGain(ens, pred, obs, alpha).block(rows);
}

// -----------------------------------------------------------------------------

Ensemble localized_update_step(const Ensemble & ens, const PredictedEnsemble & pred,
                               const ObservationSet & obs, double alpha, const TaperRows & taper,
                               const Eigen::MatrixXd & perturbed, Index block_width) {
  if (perturbed.rows() != pred.n_data() || perturbed.cols() != ens.n_members()) {
    throw DimensionMismatch("perturbed observations have the wrong shape");
  }
  const KalmanGain gain(ens, pred, obs, alpha);
  const Eigen::MatrixXd innovation = perturbed - pred.values();
  Eigen::MatrixXd updated = ens.values();

  const auto blocks = partition_rows(ens.n_params(), block_width);
  const long n_blocks = static_cast<long>(blocks.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < n_blocks; ++b) {
    try {
      const RowBlock & rows = blocks[b];
      Eigen::MatrixXd k = gain.block(rows);
      Eigen::MatrixXd r(rows.width, pred.n_data());
      taper(rows, r);
      k.array() *= r.array();
      updated.middleRows(rows.start, rows.width).noalias() += k * innovation;
    } catch (...) {
#pragma omp critical(enloc_update_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return Ensemble(std::move(updated), ens.parameters());
}

Ensemble localized_update_step(const Ensemble & ens, const PredictedEnsemble & pred,
                               const ObservationSet & obs, double alpha, const TaperRows & taper,
                               const RunSeed & seed, std::uint64_t step, Index block_width) {
  const Eigen::MatrixXd perturbed =
      perturb_observations(obs, alpha, ens.n_members(), seed, step);
  return localized_update_step(ens, pred, obs, alpha, taper, perturbed, block_width);
}

// -----------------------------------------------------------------------------

namespace {

double mean_defined_ratio(const Ensemble & prior, const Ensemble & current) {
  const Eigen::VectorXd ratio = metrics::variance_ratio_per_row(prior, current);
  metrics::CompensatedSum sum;
  Index count = 0;
  for (Index i = 0; i < ratio.size(); ++i) {
    if (std::isnan(ratio[i])) continue;
    sum.add(ratio[i]);
    ++count;
  }
  return count > 0 ? sum.value() / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

EsmdaResult run_esmda(const Ensemble & prior, const ForwardModel & model,
                      const ObservationSet & obs, const MdaSchedule & schedule,
                      const LocalizationPolicy & policy, const RunSeed & seed,
                      const EsmdaOptions & options) {
  schedule.validate();
  obs.validate();
  if (prior.n_params() != model.n_params()) {
    throw DimensionMismatch("prior does not match the model parameter count");
  }
  if (obs.size() != model.n_data()) {
    throw DimensionMismatch("observations do not match the model data count");
  }

  EsmdaResult result;
  Ensemble current = prior;
  PredictedEnsemble pred = evaluate_ensemble(model, current);
  result.prior_predictions = pred;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  StepDiagnostics initial;
  initial.step = 0;
  initial.obj_mean = metrics::objective_function(pred, obs);
  initial.nv = 1.0;
  initial.n_eff = nan;
  initial.chi = nan;
  result.steps.push_back(initial);
  if (options.on_step) options.on_step(0, current, pred);

  std::optional<Localizer> localizer;
  metrics::TaperSummary summary;
  const int n_a = static_cast<int>(schedule.alphas.size());
  for (int step = 0; step < n_a; ++step) {
    if (!localizer || !policy.freeze) {
      localizer.emplace(policy, current, pred, options.block_width);
      summary = metrics::summarize_taper(localizer->provider(), current.n_params(),
                                         pred.n_data(), metrics::kHistogramBins,
                                         options.block_width);
      if (step == 0) result.datum_t0 = localizer->datum_t0();
    }
    if (options.on_localizer) options.on_localizer(step, *localizer);

    current = localized_update_step(current, pred, obs, schedule.alphas[step],
                                    localizer->provider(), seed,
                                    static_cast<std::uint64_t>(step), options.block_width);
    pred = evaluate_ensemble(model, current);

    StepDiagnostics diag;
    diag.step = step + 1;
    diag.obj_mean = metrics::objective_function(pred, obs);
    diag.nv = mean_defined_ratio(prior, current);
    diag.n_eff = summary.n_eff;
    diag.chi = summary.chi;
    diag.taper_histogram = summary.histogram;
    result.steps.push_back(std::move(diag));
    if (options.on_step) options.on_step(step + 1, current, pred);
  }
  result.posterior = std::move(current);
  result.posterior_predictions = std::move(pred);
  return result;
}

}  // namespace enloc
