/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "enloc/ensemble.hpp"
#include "enloc/forward_models.hpp"
#include "enloc/localization.hpp"
#include "enloc/observations.hpp"
#include "enloc/random.hpp"

namespace enloc {

/// MDA inflation factors; their reciprocals must sum to one.
struct MdaSchedule {
  std::vector<double> alphas;

  /// n_a equal factors alpha = n_a.
  static MdaSchedule uniform(int n_a);
  void validate() const;
};

/// Columns d_obs + sqrt(alpha) e_k, e_k ~ N(0, C_e). Member k draws from its
/// own substream of (seed, step).
Eigen::MatrixXd perturb_observations(const ObservationSet & obs, double alpha, Index n_members,
                                     const RunSeed & seed, std::uint64_t step);

/// Kalman gain C_md (C_dd + alpha C_e)^-1 for one ensemble and step. The
/// Nd x Nd system is factored once on construction; blocks of parameter rows
/// are then produced independently.
class KalmanGain {
 public:
  KalmanGain(const Ensemble & ens, const PredictedEnsemble & pred, const ObservationSet & obs,
             double alpha);

  Eigen::MatrixXd block(const RowBlock & rows) const;

  Index n_data() const {return weights_.cols();}

 private:
  const Ensemble & ens_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd weights_;  // Ne x Nd: dD^T S^-1 / (Ne - 1)
};

Eigen::MatrixXd kalman_gain_block(const Ensemble & ens, const PredictedEnsemble & pred,
                                  const ObservationSet & obs, double alpha, const RowBlock & rows);

/// One localized ES-MDA update, m_k += (R o K)(d_k - g(m_k)) with the
/// perturbed observations d_k given column-wise.
Ensemble localized_update_step(const Ensemble & ens, const PredictedEnsemble & pred,
                               const ObservationSet & obs, double alpha, const TaperRows & taper,
                               const Eigen::MatrixXd & perturbed,
                               Index block_width = kDefaultBlockWidth);

/// Same, drawing the perturbations from the (seed, step) substreams.
Ensemble localized_update_step(const Ensemble & ens, const PredictedEnsemble & pred,
                               const ObservationSet & obs, double alpha, const TaperRows & taper,
                               const RunSeed & seed, std::uint64_t step,
                               Index block_width = kDefaultBlockWidth);

// -----------------------------------------------------------------------------

struct StepDiagnostics {
  int step = 0;         ///< 0 = prior, n_a = posterior
  double obj_mean = 0.0;
  double nv = 1.0;      ///< relative to the prior
  double n_eff = 0.0;   ///< of the taper used to reach this step (NaN at step 0)
  double chi = 0.0;
  std::vector<std::uint64_t> taper_histogram;
};

struct EsmdaOptions {
  Index block_width = kDefaultBlockWidth;
  /// Called with each update's localizer before it is applied.
  std::function<void(int step, const Localizer &)> on_localizer;
  /// Called with the prior (step 0) and with the ensemble after each update.
  std::function<void(int step, const Ensemble &, const PredictedEnsemble &)> on_step;
};

struct EsmdaResult {
  Ensemble posterior;
  PredictedEnsemble posterior_predictions;
  PredictedEnsemble prior_predictions;
  std::vector<StepDiagnostics> steps;
  /// Thresholds applied per datum (empty for families without t0).
  std::vector<double> datum_t0;
};

EsmdaResult run_esmda(const Ensemble & prior, const ForwardModel & model,
                      const ObservationSet & obs, const MdaSchedule & schedule,
                      const LocalizationPolicy & policy, const RunSeed & seed,
                      const EsmdaOptions & options = {});

}  // namespace enloc
