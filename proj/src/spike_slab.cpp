/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/spike_slab.hpp"

#include <cmath>

#include "enloc/error.hpp"

namespace enloc::spike_slab {

void validate(const SpikeSlabParams & params) {
  if (!(params.lambda > 0.0 && params.lambda < 1.0)) {
    throw InvalidArgument("lambda must lie in (0, 1)");
  }
  if (!(params.upsilon > 0.0)) throw InvalidArgument("upsilon must be positive");
  if (!(params.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
}

double gaussian_prior_taper(double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  const double tau2 = tau * tau;
  return tau2 / (tau2 + 1.0);
}

double inclusion_probability(double rho_hat, const SpikeSlabParams & params) {
  validate(params);
  const double s2 = params.sigma * params.sigma;
  const double u2 = params.upsilon * params.upsilon;
  const double odds = (1.0 - params.lambda) / params.lambda;
  const double ratio = std::sqrt((s2 + u2) / s2) *
                       std::exp(-u2 * rho_hat * rho_hat / (2.0 * s2 * (s2 + u2)));
  return 1.0 / (1.0 + odds * ratio);
}

double spike_slab_posterior_mean(double rho_hat, const SpikeSlabParams & params) {
  const double u2 = params.upsilon * params.upsilon;
  const double s2 = params.sigma * params.sigma;
  return inclusion_probability(rho_hat, params) * (u2 / (u2 + s2)) * rho_hat;
}

double taper_spike_slab(double t, double lambda, double tau) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  const double tau2 = tau * tau;
  const double r_max = gaussian_prior_taper(tau);
  if (std::isinf(t)) return r_max;
  const double odds = (1.0 - lambda) / lambda;
  const double detect = 1.0 / (1.0 + odds * std::sqrt(tau2 + 1.0) *
                                         std::exp(-tau2 * t * t / (2.0 * (1.0 + tau2))));
  return r_max * detect;
}

LogisticParams to_logistic_params(double lambda, double tau) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  const double tau2 = tau * tau;
  LogisticParams p;
  p.r_max = tau2 / (tau2 + 1.0);
  p.c = 0.5 * p.r_max;
  p.t0_sq = (2.0 * (tau2 + 1.0) / tau2) *
            std::log((1.0 - lambda) / lambda * std::sqrt(tau2 + 1.0));
  return p;
}

double logistic_from_params(double t, const LogisticParams & params) {
  if (std::isinf(t)) return params.r_max;
  return params.r_max / (1.0 + std::exp(-params.c * (t * t - params.t0_sq)));
}

// -----------------------------------------------------------------------------

double posterior_inclusion(double bayes_factor, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  return lambda * bayes_factor / ((1.0 - lambda) + lambda * bayes_factor);
}

double power_law_bayes_factor(double t, double beta, double b) {
  return b * std::pow(t, beta);
}

double power_law_t0(double lambda, double b, double beta) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (!(b > 0.0 && beta > 0.0)) throw InvalidArgument("b and beta must be positive");
  return std::pow((1.0 - lambda) / (lambda * b), 1.0 / beta);
}

double bayes_factor_power_taper(double t, double beta, double t0) {
  if (!(beta > 0.0 && t0 > 0.0)) throw InvalidArgument("beta and t0 must be positive");
  if (std::isinf(t)) return 1.0;
  if (t <= 0.0) return 0.0;
  return 1.0 / (1.0 + std::pow(t0 / t, beta));
}

}  // namespace enloc::spike_slab
