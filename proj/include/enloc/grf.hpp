/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "enloc/ensemble.hpp"
#include "enloc/random.hpp"

namespace enloc {

enum class Variogram {Exponential, Gaussian};

Variogram parse_variogram(const std::string & name);
std::string to_string(Variogram kind);

/// Stationary anisotropic Gaussian random field on a planar grid.
///
/// Ranges are practical ranges in gridblocks (correlation 0.05 at the range):
/// exponential exp(-3h), Gaussian exp(-3h^2), with h the offset rotated by
/// -angle and scaled by (range_major, range_minor). A zero range gives white
/// noise.
struct GrfPrior {
  Variogram kind = Variogram::Exponential;
  double range_major = 10.0;
  double range_minor = 10.0;
  double angle_deg = 0.0;
  double mean = 0.0;
  double std_dev = 1.0;

  void validate() const;
  double correlation(double dx, double dy) const;
};

/// Draws fields on an nx x ny grid from a dense Cholesky factor computed once.
/// Fails with GenerationError when the covariance stays indefinite after jitter.
class GrfSampler {
 public:
  GrfSampler(const GrfPrior & prior, int nx, int ny);

  /// One field, cell (i, j) stored at j * nx + i.
  void sample(std::mt19937_64 & gen, Eigen::Ref<Eigen::VectorXd> out) const;

  const GrfPrior & prior() const {return prior_;}
  int nx() const {return nx_;}
  int ny() const {return ny_;}
  /// Diagonal jitter (relative to the variance) that made the factor succeed.
  double jitter() const {return jitter_;}

 private:
  GrfPrior prior_;
  int nx_;
  int ny_;
  double jitter_ = 0.0;
  Eigen::MatrixXd lower_;
};

/// Ne independent realizations of an n_layers stack of independent layers
/// (rows ordered layer, j, i). Member k uses its own prior substream.
Ensemble sample_grf(const GrfPrior & prior, int nx, int ny, int n_layers, int count,
                    const RunSeed & seed);

/// Planar cells whose prior correlation with at least one cell of `cells`
/// reaches `threshold`. The input cells are included.
std::vector<std::pair<int, int>> correlation_halo(const GrfPrior & prior, int nx, int ny,
                                                  const std::vector<std::pair<int, int>> & cells,
                                                  double threshold);

}  // namespace enloc
