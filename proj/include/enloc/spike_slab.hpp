/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

/// Bayesian shrinkage of a noisy correlation estimate.
///
/// The estimate is modelled as rho_hat | rho ~ N(rho, sigma^2) with a
/// spike-and-slab prior on the true correlation: a point mass at zero with
/// probability 1 - lambda, and N(0, upsilon^2) otherwise. Everything here is
/// closed form; the production logistic taper lives in taper.hpp with its
/// asymptote pinned to one.

namespace enloc::spike_slab {

struct SpikeSlabParams {
  double lambda = 0.5;   ///< prior inclusion probability, in (0, 1)
  double upsilon = 1.0;  ///< slab standard deviation (> 0)
  double sigma = 1.0;    ///< sampling standard deviation of rho_hat (> 0)

  double tau() const {return upsilon / sigma;}
};

/// Scaled logistic form r(t) = r_max / (1 + exp(-c (t^2 - t0_sq))).
struct LogisticParams {
  double r_max = 1.0;
  double c = 0.5;
  /// May be <= 0 when the prior odds already favour inclusion.
  double t0_sq = 0.0;
};

void validate(const SpikeSlabParams & params);

/// tau^2 / (tau^2 + 1): the posterior-mean shrinkage under a Gaussian prior.
double gaussian_prior_taper(double tau);

/// Posterior probability that the correlation comes from the slab.
double inclusion_probability(double rho_hat, const SpikeSlabParams & params);

/// Posterior mean E[rho | rho_hat] under the spike-and-slab prior.
double spike_slab_posterior_mean(double rho_hat, const SpikeSlabParams & params);

/// Taper expressed through the standardized correlation t and tau.
double taper_spike_slab(double t, double lambda, double tau);

LogisticParams to_logistic_params(double lambda, double tau);

double logistic_from_params(double t, const LogisticParams & params);

// -----------------------------------------------------------------------------
// Taper as a posterior inclusion probability with a power-law Bayes factor
// BF(t) = b t^beta. Absorbing the prior odds into t0 gives the power-law taper.

/// lambda BF / ((1 - lambda) + lambda BF).
double posterior_inclusion(double bayes_factor, double lambda);

double power_law_bayes_factor(double t, double beta, double b);

/// t0 such that t0^beta = (1 - lambda) / (lambda b).
double power_law_t0(double lambda, double b, double beta);

/// t^beta / (t^beta + t0^beta) for any beta > 0.
double bayes_factor_power_taper(double t, double beta, double t0);

}  // namespace enloc::spike_slab
