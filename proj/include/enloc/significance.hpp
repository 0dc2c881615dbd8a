/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace enloc::significance {

/// Regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double nu);

/// Inverse CDF of the Student-t distribution with nu degrees of freedom.
double student_t_quantile(double nu, double p);

/// Two-sided critical value of the zero-correlation test at level phi,
/// i.e. the (1 - phi/2) quantile with n_e - 2 degrees of freedom.
double critical_t0(int n_e, double phi);

/// Correlation magnitude whose test statistic equals critical_t0(n_e, phi).
double critical_rho(int n_e, double phi);

/// |rho| sqrt(n_e - 2) / sqrt(1 - rho^2). Throws DegenerateStatistic at |rho| == 1.
double t_statistic(double rho_hat, int n_e);

/// p-quantile of the values with linear interpolation between order
/// statistics. Throws InvalidArgument on an empty list.
double adaptive_t0(std::span<const double> t_values, double p);

// -----------------------------------------------------------------------------
// How the threshold t0 of the power-law and logistic tapers is chosen.

struct FixedT0 {
  double t0 = 2.0;
};
struct StudentT0 {
  double phi = 0.05;
};
/// t0 per data source = p-quantile of that source's standardized correlations.
struct PercentileT0 {
  double p = 0.9;
};

using T0Strategy = std::variant<FixedT0, StudentT0, PercentileT0>;

/// Parses "t0=fixed:2", "t0=student:phi=0.05" or "t0=p90".
T0Strategy parse_t0_strategy(std::string_view text);
std::string to_string(const T0Strategy & strategy);

}  // namespace enloc::significance
