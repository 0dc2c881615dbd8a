/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/taper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "enloc/error.hpp"
#include "enloc/text.hpp"

namespace enloc::taper {

namespace {

template <class... Ts> struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string & what) {
  if (!ok) throw InvalidArgument(what);
}

void require_ensemble_size(int n_e, int minimum) {
  if (n_e < minimum) {
    throw InvalidEnsembleSize("ensemble size " + std::to_string(n_e) + " below minimum " +
                              std::to_string(minimum));
  }
}

void require_correlation(double rho_hat) {
  require(std::abs(rho_hat) <= 1.0, "correlation outside [-1, 1]");
}

// t^beta / (t^beta + t0^beta) for any positive beta.
// t^beta / (t^beta + t0^beta), written as 1 / (1 + (t0 / t)^beta) so that
// rounding keeps it monotone in t.
double power_ratio(double t, double beta, double t0) {
  if (std::isinf(t)) return 1.0;
  if (t <= 0.0) return 0.0;
  const double q = t0 / t;
  const double qb = beta == 2.0 ? q * q : std::pow(q, beta);
  return 1.0 / (1.0 + qb);
}

using Params = std::map<std::string, std::string, std::less<>>;

Params parse_params(std::string_view body) {
  Params params;
  if (text::trim(body).empty()) return params;
  for (auto item : text::split(body, ',')) {
    item = text::trim(item);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("taper parameter without '=': '" + std::string(item) + "'");
    }
    params.emplace(std::string(text::trim(item.substr(0, eq))),
                   std::string(text::trim(item.substr(eq + 1))));
  }
  return params;
}

double take(Params & params, const char * key, double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double value = text::parse_double(it->second);
  params.erase(it);
  return value;
}

}  // namespace

// -----------------------------------------------------------------------------

CorrelationStats CorrelationStats::from(double rho_hat, int n_e) {
  CorrelationStats stats;
  stats.rho_hat = rho_hat;
  stats.n_e = n_e;
  stats.sigma = sampling_std(rho_hat, n_e);
  stats.t = standardize(rho_hat, stats.sigma);
  return stats;
}

// -----------------------------------------------------------------------------

double sampling_std(double rho_hat, int n_e) {
  require_ensemble_size(n_e, 3);
  require_correlation(rho_hat);
  return (1.0 - rho_hat * rho_hat) / std::sqrt(static_cast<double>(n_e - 1));
}

double standardize(double rho_hat, double sigma) {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(rho_hat) / sigma;
}

double taper_mse(double t) {
  return power_ratio(t, 2.0, 1.0);
}

double taper_power(double t, double beta, double t0) {
  require(beta >= 2.0, "power-law taper requires beta >= 2");
  require(t0 > 0.0, "power-law taper requires t0 > 0");
  return power_ratio(t, beta, t0);
}

double logistic_steepness(double gamma, double t0, double epsilon) {
  require(gamma > 0.0 && gamma <= 2.0, "logistic taper requires gamma in (0, 2]");
  require(t0 > 0.0, "logistic taper requires t0 > 0");
  require(epsilon > 0.0 && epsilon < 0.5, "logistic taper requires epsilon in (0, 0.5)");
  return std::log((1.0 - epsilon) / epsilon) / std::pow(t0, gamma);
}

double taper_logistic(double t, double gamma, double t0, double epsilon) {
  const double c = logistic_steepness(gamma, t0, epsilon);
  if (std::isinf(t)) return 1.0;
  return 1.0 / (1.0 + std::exp(-c * (std::pow(t, gamma) - std::pow(t0, gamma))));
}

double taper_discrepancy(double t, double eta) {
  if (t <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - eta / t);
}

double gaspari_cohn(double z) {
  z = std::abs(z);
  if (z >= 2.0) return 0.0;
  if (z <= 1.0) {
    // 1 - 5/3 z^2 + 5/8 z^3 + 1/2 z^4 - 1/4 z^5
    return 1.0 + z * z * (-5.0 / 3.0 + z * (5.0 / 8.0 + z * (0.5 - 0.25 * z)));
  }
  // 4 - 5z + 5/3 z^2 + 5/8 z^3 - 1/2 z^4 + 1/12 z^5 - 2/(3z)
  return 4.0 + z * (-5.0 + z * (5.0 / 3.0 + z * (5.0 / 8.0 + z * (-0.5 + z / 12.0))))
       - 2.0 / (3.0 * z);
}

double taper_cgc(double rho_hat, double theta) {
  require_correlation(rho_hat);
  require(theta > 0.0 && theta < 1.0, "CGC taper requires theta in (0, 1)");
  return gaspari_cohn((1.0 - std::abs(rho_hat)) / (1.0 - theta));
}

double taper_po(double rho_hat, int n_e) {
  require_ensemble_size(n_e, 3);
  require_correlation(rho_hat);
  const double r2 = rho_hat * rho_hat;
  if (r2 == 0.0) return 0.0;
  return r2 / (r2 + (1.0 + r2) / n_e);
}

double taper_mpo(double rho_hat, int n_e) {
  require_ensemble_size(n_e, 3);
  require_correlation(rho_hat);
  // Hard threshold at |rho_hat| = 1/sqrt(n_e); also covers rho_hat == 0.
  if (std::abs(rho_hat) <= 1.0 / std::sqrt(static_cast<double>(n_e))) return 0.0;
  const double r2 = rho_hat * rho_hat;
  return std::max(0.0, (n_e - 1.0 / r2) / (n_e + 1.0));
}

double taper_distance(double dx, double dy, double len_major, double len_minor,
                      double angle_deg) {
  require(len_major > 0.0 && len_minor > 0.0, "distance taper requires positive lengths");
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double xr = (c * dx + s * dy) / len_major;
  const double yr = (-s * dx + c * dy) / len_minor;
  return gaspari_cohn(std::sqrt(xr * xr + yr * yr));
}

double evaluate_taper(const TaperSpec & spec, const CorrelationStats & input) {
  if (std::holds_alternative<DistanceGC>(spec)) {
    throw WrongTaperKind("distance taper needs geometry, not correlation statistics");
  }
  if (std::holds_alternative<None>(spec)) return 1.0;
  const CorrelationStats stats = CorrelationStats::from(input.rho_hat, input.n_e);
  return std::visit(Overloaded{
      [](const None &) {return 1.0;},
      [&](const Mse &) {return taper_mse(stats.t);},
      [&](const PowerLaw & p) {return taper_power(stats.t, p.beta, p.t0);},
      [&](const Logistic & p) {return taper_logistic(stats.t, p.gamma, p.t0, p.epsilon);},
      [&](const Discrepancy & p) {return taper_discrepancy(stats.t, p.eta);},
      [&](const Cgc & p) {
        if (p.theta) return taper_cgc(stats.rho_hat, *p.theta);
        // theta = sigma; sigma == 0 only at |rho_hat| == 1 where f_GC(0) = 1.
        if (stats.sigma == 0.0) return 1.0;
        return taper_cgc(stats.rho_hat, stats.sigma);
      },
      [&](const Po &) {return taper_po(stats.rho_hat, stats.n_e);},
      [&](const Mpo &) {return taper_mpo(stats.rho_hat, stats.n_e);},
      [](const DistanceGC &) {return 0.0;},
    }, spec);
}

// -----------------------------------------------------------------------------

void validate(const TaperSpec & spec) {
  std::visit(Overloaded{
      [](const PowerLaw & p) {
        require(p.beta >= 2.0, "power-law taper requires beta >= 2");
        require(p.t0 > 0.0, "power-law taper requires t0 > 0");
      },
      [](const Logistic & p) {logistic_steepness(p.gamma, p.t0, p.epsilon);},
      [](const Discrepancy & p) {require(p.eta > 0.0, "discrepancy taper requires eta > 0");},
      [](const Cgc & p) {
        if (p.theta) {
          require(*p.theta > 0.0 && *p.theta < 1.0, "CGC taper requires theta in (0, 1)");
        }
      },
      [](const DistanceGC & p) {
        require(p.len_minor > 0.0 && p.len_major >= p.len_minor,
                "distance taper requires len_major >= len_minor > 0");
      },
      [](const auto &) {},
    }, spec);
}

std::string family_name(const TaperSpec & spec) {
  return std::visit(Overloaded{
      [](const None &) {return std::string("none");},
      [](const Mse &) {return std::string("mse");},
      [](const PowerLaw &) {return std::string("power");},
      [](const Logistic &) {return std::string("logistic");},
      [](const Discrepancy &) {return std::string("discrepancy");},
      [](const Cgc &) {return std::string("cgc");},
      [](const Po &) {return std::string("po");},
      [](const Mpo &) {return std::string("mpo");},
      [](const DistanceGC &) {return std::string("distance");},
    }, spec);
}

bool is_correlation_based(const TaperSpec & spec) {
  return !std::holds_alternative<None>(spec) && !std::holds_alternative<DistanceGC>(spec);
}

TaperSpec with_t0(const TaperSpec & spec, double t0) {
  TaperSpec out = spec;
  if (auto * p = std::get_if<PowerLaw>(&out)) p->t0 = t0;
  if (auto * p = std::get_if<Logistic>(&out)) p->t0 = t0;
  return out;
}

TaperSpec parse_taper_spec(std::string_view input) {
  const std::string_view trimmed = text::trim(input);
  const auto colon = trimmed.find(':');
  const std::string family(text::trim(trimmed.substr(0, colon)));
  Params params = parse_params(colon == std::string_view::npos ? std::string_view{}
                                                                : trimmed.substr(colon + 1));
  TaperSpec spec;
  if (family == "none") {
    spec = None{};
  } else if (family == "mse") {
    spec = Mse{};
  } else if (family == "power") {
    PowerLaw p;
    p.beta = take(params, "beta", p.beta);
    p.t0 = take(params, "t0", p.t0);
    spec = p;
  } else if (family == "logistic") {
    Logistic p;
    p.gamma = take(params, "gamma", p.gamma);
    p.t0 = take(params, "t0", p.t0);
    p.epsilon = take(params, "eps", p.epsilon);
    spec = p;
  } else if (family == "discrepancy") {
    Discrepancy p;
    p.eta = take(params, "eta", p.eta);
    spec = p;
  } else if (family == "cgc") {
    Cgc p;
    const auto it = params.find("theta");
    if (it != params.end()) {
      if (it->second != "sigma") p.theta = text::parse_double(it->second);
      params.erase(it);
    }
    spec = p;
  } else if (family == "po") {
    spec = Po{};
  } else if (family == "mpo") {
    spec = Mpo{};
  } else if (family == "distance") {
    DistanceGC p;
    p.len_major = take(params, "major", p.len_major);
    p.len_minor = take(params, "minor", p.len_major);
    p.angle_deg = take(params, "angle", p.angle_deg);
    spec = p;
  } else {
    throw ParseError("unknown taper family '" + family + "'");
  }
  if (!params.empty()) {
    throw ParseError("unknown parameter '" + params.begin()->first + "' for taper '" +
                     family + "'");
  }
  validate(spec);
  return spec;
}

std::string to_string(const TaperSpec & spec) {
  using text::format_double;
  return std::visit(Overloaded{
      [](const None &) {return std::string("none");},
      [](const Mse &) {return std::string("mse");},
      [](const PowerLaw & p) {
        return "power:beta=" + format_double(p.beta) + ",t0=" + format_double(p.t0);
      },
      [](const Logistic & p) {
        return "logistic:gamma=" + format_double(p.gamma) + ",t0=" + format_double(p.t0) +
               ",eps=" + format_double(p.epsilon);
      },
      [](const Discrepancy & p) {return "discrepancy:eta=" + format_double(p.eta);},
      [](const Cgc & p) {
        return "cgc:theta=" + (p.theta ? format_double(*p.theta) : std::string("sigma"));
      },
      [](const Po &) {return std::string("po");},
      [](const Mpo &) {return std::string("mpo");},
      [](const DistanceGC & p) {
        return "distance:major=" + format_double(p.len_major) + ",minor=" +
               format_double(p.len_minor) + ",angle=" + format_double(p.angle_deg);
      },
    }, spec);
}

}  // namespace enloc::taper
