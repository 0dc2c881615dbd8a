/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace enloc::taper {

// -----------------------------------------------------------------------------
/// Sample correlation together with its plug-in sampling standard deviation
/// and the standardized magnitude t = |rho_hat| / sigma.
///
/// When |rho_hat| == 1 the sampling deviation is zero and t is +infinity.
struct CorrelationStats {
  double rho_hat = 0.0;
  double sigma = 0.0;
  double t = 0.0;
  int n_e = 0;

  /// Builds consistent statistics from a correlation and an ensemble size.
  static CorrelationStats from(double rho_hat, int n_e);
};

// -----------------------------------------------------------------------------
// Taper families. Parameters are dimensionless except the distance lengths
// (gridblocks) and the anisotropy angle (degrees).

/// r == 1 everywhere; the unlocalized update.
struct None {};
struct Mse {};
struct PowerLaw {
  double beta = 3.0;
  double t0 = 2.0;
};
struct Logistic {
  double gamma = 1.5;
  double t0 = 2.0;
  double epsilon = 0.01;
};
struct Discrepancy {
  double eta = 0.5;
};
/// Correlation Gaspari-Cohn. An empty theta means theta = sigma(rho_hat, Ne).
struct Cgc {
  std::optional<double> theta;
};
struct Po {};
struct Mpo {};
struct DistanceGC {
  double len_major = 1.0;
  double len_minor = 1.0;
  double angle_deg = 0.0;
};

using TaperSpec = std::variant<None, Mse, PowerLaw, Logistic, Discrepancy, Cgc, Po, Mpo,
                               DistanceGC>;

/// Throws InvalidArgument when the parameters violate the family's ranges.
void validate(const TaperSpec & spec);

/// Parses the canonical text form, e.g. "logistic:gamma=1.5,t0=2,eps=0.01".
TaperSpec parse_taper_spec(std::string_view text);
std::string to_string(const TaperSpec & spec);

/// Short family name ("mse", "power", ...).
std::string family_name(const TaperSpec & spec);

bool is_correlation_based(const TaperSpec & spec);

/// Returns a copy with the threshold t0 replaced (PowerLaw and Logistic only;
/// other families are returned unchanged).
TaperSpec with_t0(const TaperSpec & spec, double t0);

// -----------------------------------------------------------------------------
// Primitive functions.

/// (1 - rho_hat^2) / sqrt(n_e - 1). Throws InvalidEnsembleSize for n_e < 3.
double sampling_std(double rho_hat, int n_e);

/// |rho_hat| / sigma, or +infinity when sigma == 0.
double standardize(double rho_hat, double sigma);

double taper_mse(double t);
double taper_power(double t, double beta, double t0);

/// Logistic taper with unit asymptote and r(0) = epsilon.
double taper_logistic(double t, double gamma, double t0, double epsilon);

/// Steepness that makes the logistic taper equal epsilon at t = 0.
double logistic_steepness(double gamma, double t0, double epsilon);

double taper_discrepancy(double t, double eta);

/// Compactly supported fifth-order piecewise rational function; zero for z >= 2.
double gaspari_cohn(double z);

double taper_cgc(double rho_hat, double theta);
double taper_po(double rho_hat, int n_e);
double taper_mpo(double rho_hat, int n_e);

/// Anisotropic Gaspari-Cohn of a planar offset. The offset is rotated by
/// -angle so that the major axis lies along x'; the taper vanishes at twice
/// the length along each principal direction.
double taper_distance(double dx, double dy, double len_major, double len_minor,
                      double angle_deg);

/// Single dispatch over the correlation-based families. DistanceGC throws
/// WrongTaperKind.
double evaluate_taper(const TaperSpec & spec, const CorrelationStats & stats);

}  // namespace enloc::taper
