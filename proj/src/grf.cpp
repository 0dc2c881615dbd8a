/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/grf.hpp"

#include <cmath>
#include <numbers>

#include "enloc/error.hpp"

namespace enloc {

Variogram parse_variogram(const std::string & name) {
  if (name == "exponential") return Variogram::Exponential;
  if (name == "gaussian") return Variogram::Gaussian;
  throw InvalidArgument("unknown variogram '" + name + "'");
}

std::string to_string(Variogram kind) {
  return kind == Variogram::Exponential ? "exponential" : "gaussian";
}

void GrfPrior::validate() const {
  if (!(range_major >= 0.0 && range_minor >= 0.0)) {
    throw InvalidArgument("variogram ranges must be non-negative");
  }
  if (!(std_dev > 0.0) || !std::isfinite(mean)) {
    throw InvalidArgument("field needs a finite mean and a positive standard deviation");
  }
}

double GrfPrior::correlation(double dx, double dy) const {
  if (dx == 0.0 && dy == 0.0) return 1.0;
  if (range_major <= 0.0 || range_minor <= 0.0) return 0.0;
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double u = (std::cos(a) * dx + std::sin(a) * dy) / range_major;
  const double v = (-std::sin(a) * dx + std::cos(a) * dy) / range_minor;
  const double h2 = u * u + v * v;
  return kind == Variogram::Exponential ? std::exp(-3.0 * std::sqrt(h2)) : std::exp(-3.0 * h2);
}

// -----------------------------------------------------------------------------

GrfSampler::GrfSampler(const GrfPrior & prior, int nx, int ny)
  : prior_(prior), nx_(nx), ny_(ny)
{
  prior_.validate();
  if (nx < 1 || ny < 1) throw InvalidArgument("grid dimensions must be positive");
  const Index n = static_cast<Index>(nx) * ny;
  Eigen::MatrixXd cov(n, n);
  for (Index p = 0; p < n; ++p) {
    for (Index q = 0; q <= p; ++q) {
      const double dx = static_cast<double>(p % nx - q % nx);
      const double dy = static_cast<double>(p / nx - q / nx);
      cov(p, q) = prior_.correlation(dx, dy);
    }
  }
  // Smooth variograms are numerically singular; escalate a diagonal nugget.
  for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
    Eigen::MatrixXd trial = cov;
    trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt;
    llt.compute(trial);
    if (llt.info() == Eigen::Success) {
      jitter_ = jitter;
      lower_ = llt.matrixL();
      lower_ *= prior_.std_dev;
      return;
    }
  }
  throw GenerationError("covariance is not positive definite even with jitter");
}

void GrfSampler::sample(std::mt19937_64 & gen, Eigen::Ref<Eigen::VectorXd> out) const {
  if (out.size() != lower_.rows()) throw DimensionMismatch("field has the wrong length");
  Eigen::VectorXd z(lower_.rows());
  fill_standard_normal(gen, z);
  out.noalias() = lower_.triangularView<Eigen::Lower>() * z;
  out.array() += prior_.mean;
}

Ensemble sample_grf(const GrfPrior & prior, int nx, int ny, int n_layers, int count,
                    const RunSeed & seed) {
  if (n_layers < 1) throw InvalidArgument("need at least one layer");
  if (count < 2) throw InvalidEnsembleSize("an ensemble needs at least 2 members");
  const GrfSampler sampler(prior, nx, ny);
  const Index cells = static_cast<Index>(nx) * ny;
  Eigen::MatrixXd values(cells * n_layers, count);
  for (int k = 0; k < count; ++k) {
    auto gen = seed.stream(StreamPurpose::Prior, 0, static_cast<std::uint64_t>(k));
    for (int layer = 0; layer < n_layers; ++layer) {
      sampler.sample(gen, values.col(k).segment(layer * cells, cells));
    }
  }
  std::vector<ParameterInfo> params(values.rows());
  for (int layer = 0; layer < n_layers; ++layer) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        auto & p = params[layer * cells + j * nx + i];
        p.field = "field";
        p.cell = GridCell{i, j, layer};
        p.name = parameter_id(p, 0);
      }
    }
  }
  return Ensemble(std::move(values), std::move(params));
}

std::vector<std::pair<int, int>> correlation_halo(const GrfPrior & prior, int nx, int ny,
                                                  const std::vector<std::pair<int, int>> & cells,
                                                  double threshold) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      for (const auto & [ci, cj] : cells) {
        if (prior.correlation(i - ci, j - cj) >= threshold) {
          out.emplace_back(i, j);
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace enloc
