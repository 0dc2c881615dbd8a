/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "enloc/error.hpp"
#include "enloc/forward_models.hpp"
#include "enloc/grf.hpp"
#include "oracles/dense.hpp"

using namespace enloc;
using doctest::Approx;

namespace {

/// Fails for members whose first parameter exceeds a limit.
class PickyModel : public ForwardModel {
 public:
  explicit PickyModel(double limit, bool produce_nan = false)
    : limit_(limit), produce_nan_(produce_nan) {}
  Index n_params() const override {return 2;}
  Index n_data() const override {return 1;}
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd> & m) const override {
    if (m[0] > limit_) {
      if (produce_nan_) return Eigen::VectorXd::Constant(1, std::nan(""));
      throw std::runtime_error("solver diverged");
    }
    return Eigen::VectorXd::Constant(1, m[0] + m[1]);
  }

 private:
  double limit_;
  bool produce_nan_;
};

GridFlowConfig small_grid(int n_layers = 1) {
  GridFlowConfig config;
  config.nx = 20;
  config.ny = 20;
  config.n_layers = n_layers;
  config.patterns_x = 2;
  config.patterns_y = 2;
  config.n_times = 24;
  return config;
}

Eigen::VectorXd uniform_field(const GridFlowProxy & model, double poro, double logk) {
  Eigen::VectorXd m(model.n_params());
  m.head(model.n_cells()).setConstant(poro);
  m.tail(model.n_cells()).setConstant(logk);
  return m;
}

double logistic(double x) {return 1.0 / (1.0 + std::exp(-x));}

}  // namespace

// -----------------------------------------------------------------------------

TEST_CASE("linear model") {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 2.0, 3.0, 4.0;
  const LinearModel model(g);
  CHECK(model.evaluate(Eigen::Vector2d(1.0, 1.0)) == Eigen::Vector2d(3.0, 7.0));
  CHECK_THROWS_AS(model.evaluate(Eigen::Vector3d::Ones()), DimensionMismatch);
  const auto info = model.data_info();
  REQUIRE(info.size() == 2);
  CHECK(info[1].source == "d1");
  const Ensemble ens(oracle::random_matrix(2, 5, 1));
  const PredictedEnsemble pred = evaluate_ensemble(model, ens);
  CHECK((pred.values() - g * ens.values()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(evaluate_ensemble(model, Ensemble(Eigen::MatrixXd::Ones(3, 4))),
                  DimensionMismatch);
}

TEST_CASE("ensemble evaluation reports the first failing member") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 12);
  m(0, 9) = 5.0;
  m(0, 4) = 5.0;
  m(0, 11) = 5.0;
  for (bool nan : {false, true}) {
    try {
      evaluate_ensemble(PickyModel(1.0, nan), Ensemble(m));
      FAIL("expected a failure");
    } catch (const ForwardModelError & e) {
      CHECK(e.member() == 4u);
    }
  }
  CHECK_NOTHROW(evaluate_ensemble(PickyModel(10.0), Ensemble(m)));
}

// -----------------------------------------------------------------------------

TEST_CASE("scalar toy model structure") {
  const ScalarToyModel model;
  CHECK(model.n_params() == 20);
  CHECK(model.n_data() == 300);
  CHECK(model.dummy_indices().size() == 5);
  CHECK(model.active_indices().size() == 15);
  CHECK(model.dummy_indices().front() == 15);
  const auto info = model.data_info();
  CHECK(info[0].source == "S1");
  CHECK(info[299].source == "S10");
  CHECK(info[31].time_index == 1);

  const ScalarToyModel same;
  ScalarToyConfig other_config;
  other_config.seed = 8;
  const ScalarToyModel other(other_config);
  const Eigen::VectorXd m = oracle::random_matrix(20, 1, 3).col(0);
  CHECK(model.evaluate(m) == same.evaluate(m));
  CHECK(model.evaluate(m) != other.evaluate(m));
  CHECK(model.evaluate(m).allFinite());
}

TEST_CASE("scalar toy responses ignore the dummy block") {
  const ScalarToyModel model;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd m = oracle::random_matrix(20, 1, 10 + trial).col(0);
    const Eigen::VectorXd base = model.evaluate(m);
    for (Index i : model.dummy_indices()) m[i] += 10.0 * (trial + 1);
    CHECK(model.evaluate(m) == base);
  }
}

TEST_CASE("scalar toy sensitivities") {
  // Central finite differences: zero for dummies, non-zero for every active parameter.
  const ScalarToyModel model;
  const Eigen::VectorXd m = 0.5 * oracle::random_matrix(20, 1, 99).col(0);
  const double h = 1e-5;
  for (Index i = 0; i < 20; ++i) {
    Eigen::VectorXd up = m;
    Eigen::VectorXd down = m;
    up[i] += h;
    down[i] -= h;
    const Eigen::VectorXd fd = (model.evaluate(up) - model.evaluate(down)) / (2.0 * h);
    if (i >= 15) {
      CHECK(fd.isZero(0.0));
    } else {
      CHECK(fd.cwiseAbs().maxCoeff() > 1e-3);
    }
  }
}

// -----------------------------------------------------------------------------

TEST_CASE("grid proxy layout") {
  const GridFlowProxy model(small_grid(2));
  CHECK(model.n_cells() == 800);
  CHECK(model.n_params() == 1600);
  CHECK(model.wells().size() == 4u + 9u);
  CHECK(model.n_data() == 13 * 24);
  CHECK(model.param_index(1, 3, 2, 1) == ((1 * 2 + 1) * 20 + 2) * 20 + 3);
  const auto params = model.parameter_info();
  CHECK(params[model.param_index(0, 7, 5, 1)].field == "poro");
  CHECK(*params[model.param_index(1, 7, 5, 1)].cell == GridCell{7, 5, 1});
  const auto data = model.data_info();
  CHECK(data[0].kind == "wct");
  CHECK(data[0].source == "P1");
  CHECK(data.back().kind == "wir");
  CHECK(data.back().location->first == 19.0);
  CHECK(model.corridor_cells().size() == 16u);
}

TEST_CASE("grid proxy closed form for a uniform field") {
  const GridFlowProxy model(small_grid());
  const double poro = 0.2;
  const Eigen::VectorXd d = model.evaluate(uniform_field(model, poro, 0.0));
  const auto & wells = model.wells();
  const auto & config = model.config();
  double shortest = 1e300;
  for (std::size_t w = 0; w < wells.size(); ++w) {
    if (wells[w].injector) continue;
    // The pattern corners are the four nearest injectors.
    std::vector<double> lengths;
    for (const Well & q : wells) {
      if (q.injector) lengths.push_back(std::hypot(q.i - wells[w].i, q.j - wells[w].j));
    }
    std::sort(lengths.begin(), lengths.end());
    lengths.resize(4);
    shortest = std::min(shortest, lengths.front());
    double t_sum = 0.0;
    for (double l : lengths) t_sum += 1.0 / l;
    for (int n = 0; n < config.n_times; ++n) {
      double expected = 0.0;
      for (double l : lengths) {
        const double tbt = config.time_scale * poro * l * l;
        expected += (1.0 / l) / t_sum * logistic((n + 1.0 - tbt) / config.ramp_width);
      }
      CHECK(d[static_cast<Index>(w) * config.n_times + n] == Approx(expected).epsilon(1e-12));
    }
  }
  const Eigen::VectorXd tbt = model.breakthrough_times(uniform_field(model, poro, 0.0));
  CHECK(tbt.minCoeff() == Approx(config.time_scale * poro * shortest * shortest).epsilon(1e-12));
}

TEST_CASE("grid proxy monotonicity") {
  const GridFlowProxy model(small_grid());
  const Index nt = model.config().n_times;
  const Eigen::VectorXd base = model.evaluate(uniform_field(model, 0.2, 0.0));
  const Eigen::VectorXd more_k = model.evaluate(uniform_field(model, 0.2, 0.5));
  const Eigen::VectorXd more_phi = model.evaluate(uniform_field(model, 0.25, 0.0));
  for (std::size_t w = 0; w < model.wells().size(); ++w) {
    for (Index n = 0; n < nt; ++n) {
      const Index j = static_cast<Index>(w) * nt + n;
      if (model.wells()[w].injector) {
        CHECK(more_k[j] > base[j]);
      } else {
        CHECK(more_k[j] >= base[j]);
        CHECK(more_phi[j] <= base[j]);
      }
    }
  }
  // Water cut rises over time.
  for (Index n = 1; n < nt; ++n) CHECK(base[n] >= base[n - 1]);
}

TEST_CASE("grid proxy responses are local to corridors") {
  const GridFlowProxy model(small_grid(2));
  const auto mask = model.sensitivity_mask();
  REQUIRE(mask.size() == static_cast<std::size_t>(model.n_data()));
  for (const auto & rows : mask) CHECK(std::is_sorted(rows.begin(), rows.end()));
  const Eigen::VectorXd base_m = 0.1 * oracle::random_matrix(model.n_params(), 1, 5).col(0) +
                                 uniform_field(model, 0.2, 0.0);
  const Eigen::VectorXd base = model.evaluate(base_m);
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<Index> pick(0, model.n_params() - 1);
  for (int trial = 0; trial < 60; ++trial) {
    const Index row = pick(gen);
    Eigen::VectorXd m = base_m;
    m[row] += 0.05;
    const Eigen::VectorXd d = model.evaluate(m);
    for (Index j = 0; j < model.n_data(); ++j) {
      const bool inside = std::binary_search(mask[j].begin(), mask[j].end(), row);
      if (!inside) CHECK(d[j] == base[j]);
    }
  }
  // A corridor cell moves its well's data in every layer and both fields.
  const auto [ci, cj] = model.corridor_cells().front().front();
  for (int field = 0; field < 2; ++field) {
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd m = base_m;
      m[model.param_index(field, ci, cj, k)] += 0.05;
      CHECK((model.evaluate(m) - base).cwiseAbs().maxCoeff() > 0.0);
    }
  }
}

TEST_CASE("grid proxy configuration checks") {
  GridFlowConfig config = small_grid();
  config.nx = 0;
  CHECK_THROWS_AS(GridFlowProxy{config}, InvalidArgument);
  config = small_grid();
  config.ramp_width = 0.0;
  CHECK_THROWS_AS(GridFlowProxy{config}, InvalidArgument);
}

// -----------------------------------------------------------------------------

TEST_CASE("variogram correlations") {
  GrfPrior prior;
  prior.range_major = 10.0;
  prior.range_minor = 4.0;
  CHECK(prior.correlation(0.0, 0.0) == 1.0);
  CHECK(prior.correlation(10.0, 0.0) == Approx(std::exp(-3.0)));
  CHECK(prior.correlation(0.0, 4.0) == Approx(std::exp(-3.0)));
  CHECK(prior.correlation(5.0, 0.0) > prior.correlation(0.0, 5.0));
  prior.angle_deg = 90.0;
  CHECK(prior.correlation(0.0, 10.0) == Approx(std::exp(-3.0)));
  prior.kind = Variogram::Gaussian;
  CHECK(prior.correlation(0.0, 5.0) == Approx(std::exp(-0.75)));
  prior.range_major = 0.0;
  CHECK(prior.correlation(1.0, 0.0) == 0.0);
  CHECK(parse_variogram("gaussian") == Variogram::Gaussian);
  CHECK(to_string(Variogram::Exponential) == "exponential");
  CHECK_THROWS_AS(parse_variogram("spherical"), InvalidArgument);
  prior.std_dev = 0.0;
  CHECK_THROWS_AS(prior.validate(), InvalidArgument);
}

TEST_CASE("random field statistics") {
  GrfPrior prior;
  prior.range_major = 6.0;
  prior.range_minor = 6.0;
  prior.mean = 2.0;
  prior.std_dev = 0.5;
  const int n = 4000;
  const Ensemble ens = sample_grf(prior, 8, 8, 1, n, RunSeed{5});
  const Eigen::MatrixXd & x = ens.values();
  // Standard errors for n = 4000 are about 0.008 (mean), 0.006 (variance), 0.016 (correlation).
  CHECK(x.row(27).mean() == Approx(2.0).epsilon(0.02));
  const double var = oracle::naive_covariance(x.row(27), x.row(27));
  CHECK(var == Approx(0.25).epsilon(0.1));
  const double rho1 = oracle::naive_covariance(x.row(27), x.row(28)) / var;
  const double rho3 = oracle::naive_covariance(x.row(27), x.row(27 + 24)) / var;
  CHECK(std::abs(rho1 - prior.correlation(1.0, 0.0)) <= 0.06);
  CHECK(std::abs(rho3 - prior.correlation(0.0, 3.0)) <= 0.06);

  // Reproducible per member and layer-independent.
  const Ensemble small = sample_grf(prior, 8, 8, 2, 3, RunSeed{5});
  CHECK(small.values().col(1).head(64) == x.col(1));
  CHECK(small.values().col(1).tail(64) != x.col(1));
  CHECK(*small.parameters()[70].cell == GridCell{6, 0, 1});
}

TEST_CASE("smooth variograms factor with jitter") {
  GrfPrior prior;
  prior.kind = Variogram::Gaussian;
  prior.range_major = 15.0;
  prior.range_minor = 15.0;
  const GrfSampler sampler(prior, 12, 12);
  CHECK(sampler.jitter() > 0.0);
  CHECK(sampler.jitter() <= 1e-4);
  GrfPrior white;
  white.range_major = 0.0;
  white.range_minor = 0.0;
  CHECK(GrfSampler(white, 5, 5).jitter() == 0.0);
}

TEST_CASE("correlation halo") {
  GrfPrior prior;
  prior.range_major = 6.0;
  prior.range_minor = 3.0;
  prior.angle_deg = 30.0;
  const std::vector<std::pair<int, int>> cells = {{4, 4}, {5, 5}};
  const auto halo = correlation_halo(prior, 15, 12, cells, 0.05);
  for (const auto & c : cells) CHECK(std::find(halo.begin(), halo.end(), c) != halo.end());
  for (int j = 0; j < 12; ++j) {
    for (int i = 0; i < 15; ++i) {
      double best = 0.0;
      for (const auto & [ci, cj] : cells) best = std::max(best, prior.correlation(i - ci, j - cj));
      const bool in = std::find(halo.begin(), halo.end(), std::make_pair(i, j)) != halo.end();
      CHECK(in == (best >= 0.05));
    }
  }
  CHECK(correlation_halo(prior, 15, 12, cells, 1.0).size() == 2u);
}
