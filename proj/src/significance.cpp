/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/significance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "enloc/error.hpp"
#include "enloc/text.hpp"

namespace enloc::significance {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

// -----------------------------------------------------------------------------

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("Student-t requires nu > 0");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double t2 = t * t;
  // Two-sided tail mass P(|T| > |t|); near t = 0 the complementary form
  // avoids cancellation in 1 - x.
  double two_sided;
  if (t2 < nu) {
    two_sided = 1.0 - regularized_incomplete_beta(0.5, 0.5 * nu, t2 / (nu + t2));
  } else {
    two_sided = regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t2));
  }
  return t > 0.0 ? 1.0 - 0.5 * two_sided : 0.5 * two_sided;
}

double student_t_quantile(double nu, double p) {
  if (!(nu >= 1.0)) throw InvalidArgument("Student-t quantile requires nu >= 1");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("probability must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(nu, 1.0 - p);

  // Central probabilities solve I_y(1/2, nu/2) = 2p - 1 for y = t^2 / (nu + t^2);
  // tail probabilities solve I_x(nu/2, 1/2) = 2(1 - p) for x = 1 - y. Both are
  // increasing in their variable, so bisection converges.
  const bool central = p < 0.75;
  const double target = central ? 2.0 * p - 1.0 : 2.0 * (1.0 - p);
  auto value_at = [&](double z) {
    return central ? regularized_incomplete_beta(0.5, 0.5 * nu, z)
                   : regularized_incomplete_beta(0.5 * nu, 0.5, z);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = value_at(mid);
    if (std::abs(value - target) <= 1e-15 * target) {
      lo = hi = mid;
      break;
    }
    if (value < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double z = 0.5 * (lo + hi);
  return central ? std::sqrt(nu * z / (1.0 - z)) : std::sqrt(nu * (1.0 - z) / z);
}

double critical_t0(int n_e, double phi) {
  if (n_e < 4) throw InvalidEnsembleSize("significance thresholds require n_e >= 4");
  if (!(phi > 0.0 && phi < 1.0)) throw InvalidArgument("significance level must lie in (0, 1)");
  return student_t_quantile(n_e - 2.0, 1.0 - 0.5 * phi);
}

double critical_rho(int n_e, double phi) {
  const double t = critical_t0(n_e, phi);
  return t / std::sqrt(t * t + (n_e - 2.0));
}

double t_statistic(double rho_hat, int n_e) {
  if (n_e < 4) throw InvalidEnsembleSize("t statistic requires n_e >= 4");
  const double r = std::abs(rho_hat);
  if (!(r < 1.0)) throw DegenerateStatistic("t statistic undefined for |rho| >= 1");
  return r * std::sqrt(n_e - 2.0) / std::sqrt(1.0 - r * r);
}

double adaptive_t0(std::span<const double> t_values, double p) {
  if (t_values.empty()) throw InvalidArgument("percentile of an empty list");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("percentile must lie in (0, 1)");
  std::vector<double> sorted(t_values.begin(), t_values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

// -----------------------------------------------------------------------------

T0Strategy parse_t0_strategy(std::string_view input) {
  std::string_view s = text::trim(input);
  if (s.starts_with("t0=")) s.remove_prefix(3);
  if (s.starts_with("fixed:")) {
    const double t0 = text::parse_double(s.substr(6));
    if (!(t0 > 0.0)) throw InvalidArgument("fixed t0 must be positive");
    return FixedT0{t0};
  }
  if (s.starts_with("student:")) {
    s.remove_prefix(8);
    if (s.starts_with("phi=")) s.remove_prefix(4);
    const double phi = text::parse_double(s);
    if (!(phi > 0.0 && phi < 1.0)) throw InvalidArgument("phi must lie in (0, 1)");
    return StudentT0{phi};
  }
  if (s.starts_with("p") && s.size() > 1) {
    const double pct = text::parse_double(s.substr(1));
    if (!(pct > 0.0 && pct < 100.0)) throw InvalidArgument("percentile must lie in (0, 100)");
    return PercentileT0{pct / 100.0};
  }
  throw ParseError("unrecognized t0 strategy '" + std::string(input) + "'");
}

std::string to_string(const T0Strategy & strategy) {
  if (const auto * f = std::get_if<FixedT0>(&strategy)) {
    return "t0=fixed:" + text::format_double(f->t0);
  }
  if (const auto * s = std::get_if<StudentT0>(&strategy)) {
    return "t0=student:phi=" + text::format_double(s->phi);
  }
  const auto & p = std::get<PercentileT0>(strategy);
  return "t0=p" + text::format_double(p.p * 100.0);
}

}  // namespace enloc::significance
