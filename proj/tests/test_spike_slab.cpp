/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <limits>

#include <doctest.h>

#include "enloc/error.hpp"
#include "enloc/spike_slab.hpp"
#include "enloc/taper.hpp"
#include "oracles/quadrature.hpp"

using namespace enloc;
using namespace enloc::spike_slab;
using doctest::Approx;

// -----------------------------------------------------------------------------

TEST_CASE("posterior mean matches direct integration") {
  for (double lambda : {0.05, 0.3, 0.5, 0.9}) {
    for (double upsilon : {0.1, 0.3, 1.0}) {
      for (double sigma : {0.05, 0.1, 0.25}) {
        for (double rho_hat : {-0.8, -0.3, 0.0, 0.02, 0.15, 0.4, 0.95}) {
          const SpikeSlabParams params{lambda, upsilon, sigma};
          const double expected =
              enloc::oracle::spike_slab_posterior_mean(rho_hat, lambda, upsilon, sigma);
          CAPTURE(lambda);
          CAPTURE(upsilon);
          CAPTURE(sigma);
          CAPTURE(rho_hat);
          CHECK(std::abs(spike_slab_posterior_mean(rho_hat, params) - expected) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("taper form equals posterior mean over rho_hat") {
  for (double lambda : {0.1, 0.5}) {
    for (double rho_hat : {0.05, 0.2, 0.6}) {
      const SpikeSlabParams params{lambda, 0.4, 0.1};
      const double t = std::abs(rho_hat) / params.sigma;
      CHECK(taper_spike_slab(t, lambda, params.tau()) ==
            Approx(spike_slab_posterior_mean(rho_hat, params) / rho_hat).epsilon(1e-12));
    }
  }
}

TEST_CASE("logistic reparameterization is exact") {
  for (double lambda : {0.01, 0.1, 0.5, 0.8}) {
    for (double tau : {0.3, 1.0, 3.0, 10.0}) {
      const auto p = to_logistic_params(lambda, tau);
      for (double t : {0.0, 0.5, 1.0, 2.0, 3.5, 8.0}) {
        CHECK(std::abs(logistic_from_params(t, p) - taper_spike_slab(t, lambda, tau)) <= 1e-12);
      }
    }
  }
  const auto p = to_logistic_params(0.1, 3.0);
  CHECK(p.t0_sq == Approx(7.44114916407387).epsilon(1e-12));
  CHECK(p.r_max == Approx(0.9).epsilon(1e-15));
  CHECK(p.c == Approx(0.45).epsilon(1e-15));
}

TEST_CASE("asymptote and Gaussian-prior limit") {
  CHECK(gaussian_prior_taper(3.0) == Approx(0.9));
  CHECK(gaussian_prior_taper(0.0) == 0.0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  CHECK(taper_spike_slab(kInf, 0.2, 2.0) == Approx(0.8));
  CHECK(taper_spike_slab(60.0, 0.2, 2.0) == Approx(0.8).epsilon(1e-12));
  // lambda -> 1 removes the spike.
  CHECK(taper_spike_slab(0.7, 1.0 - 1e-12, 2.0) == Approx(0.8).epsilon(1e-9));
  CHECK_THROWS_AS(validate(SpikeSlabParams{0.0, 1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(SpikeSlabParams{0.5, -1.0, 1.0}), InvalidArgument);
}

TEST_CASE("power-law Bayes factor yields the power taper") {
  // t = 3, beta = 3, lambda = 0.2, b = 2: BF = 54, posterior 27/29.
  CHECK(power_law_bayes_factor(3.0, 3.0, 2.0) == Approx(54.0));
  CHECK(posterior_inclusion(54.0, 0.2) == Approx(27.0 / 29.0).epsilon(1e-14));
  const double t0 = power_law_t0(0.2, 2.0, 3.0);
  CHECK(bayes_factor_power_taper(3.0, 3.0, t0) == Approx(27.0 / 29.0).epsilon(1e-14));
  for (double lambda : {0.05, 0.5, 0.9}) {
    for (double beta : {0.7, 2.0, 3.0, 5.5}) {
      for (double t : {0.0, 0.4, 1.0, 2.2, 9.0}) {
        const double b = 1.7;
        const double direct = posterior_inclusion(power_law_bayes_factor(t, beta, b), lambda);
        const double taper = bayes_factor_power_taper(t, beta, power_law_t0(lambda, b, beta));
        CHECK(std::abs(direct - taper) <= 1e-12);
        if (beta >= 2.0) {
          CHECK(std::abs(taper - enloc::taper::taper_power(t, beta, power_law_t0(lambda, b, beta)))
                <= 1e-12);
        }
      }
    }
  }
}
