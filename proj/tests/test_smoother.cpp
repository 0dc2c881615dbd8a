/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <vector>

#include <doctest.h>

#include "enloc/error.hpp"
#include "enloc/forward_models.hpp"
#include "enloc/localization.hpp"
#include "enloc/metrics.hpp"
#include "enloc/significance.hpp"
#include "enloc/smoother.hpp"
#include "enloc/taper.hpp"
#include "oracles/dense.hpp"

using namespace enloc;
using doctest::Approx;

namespace {

struct LinearCase {
  Eigen::MatrixXd g;
  Ensemble prior;
  PredictedEnsemble pred;
  ObservationSet obs;
};

LinearCase make_linear_case(int n_params, int n_data, int n_e, std::uint64_t seed) {
  LinearCase c;
  c.g = oracle::random_matrix(n_data, n_params, seed) / std::sqrt(static_cast<double>(n_params));
  c.prior = Ensemble(oracle::random_matrix(n_params, n_e, seed + 1));
  c.pred = PredictedEnsemble(c.g * c.prior.values());
  c.obs.d_obs = c.g * oracle::random_matrix(n_params, 1, seed + 2).col(0);
  c.obs.sigma_e = Eigen::VectorXd::Constant(n_data, 0.3);
  return c;
}

double max_abs(const Eigen::MatrixXd & a) {return a.cwiseAbs().maxCoeff();}

}  // namespace

// -----------------------------------------------------------------------------

TEST_CASE("MDA schedules") {
  const auto uniform = MdaSchedule::uniform(4);
  CHECK(uniform.alphas == std::vector<double>{4.0, 4.0, 4.0, 4.0});
  CHECK_NOTHROW(uniform.validate());
  const MdaSchedule decreasing{{2.0, 4.0, 8.0, 8.0}};
  const MdaSchedule over{{2.0, 2.0, 2.0}};
  const MdaSchedule empty;
  CHECK_NOTHROW(decreasing.validate());
  CHECK_THROWS_AS(over.validate(), InvalidArgument);
  CHECK_THROWS_AS(empty.validate(), InvalidArgument);
  CHECK_THROWS_AS(MdaSchedule::uniform(0), InvalidArgument);
}

TEST_CASE("scalar gain equals var / (var + alpha sigma^2)") {
  const Eigen::MatrixXd m = oracle::random_matrix(1, 40, 3);
  const Ensemble ens(m);
  const PredictedEnsemble pred(m);
  ObservationSet obs{Eigen::VectorXd::Constant(1, 0.7), Eigen::VectorXd::Constant(1, 0.4)};
  const double var = oracle::naive_covariance(m.row(0), m.row(0));
  for (double alpha : {1.0, 4.0, 10.0}) {
    const double k = kalman_gain_block(ens, pred, obs, alpha, {0, 1})(0, 0);
    CHECK(k == Approx(var / (var + alpha * 0.16)).epsilon(1e-13));
  }
}

TEST_CASE("blockwise gain matches the explicit formula") {
  const auto c = make_linear_case(37, 11, 25, 100);
  const Eigen::MatrixXd expected = oracle::naive_gain(c.prior.values(), c.pred.values(),
                                                      c.obs.sigma_e, 3.0);
  const KalmanGain gain(c.prior, c.pred, c.obs, 3.0);
  for (Index width : {1, 5, 37}) {
    Eigen::MatrixXd k(37, 11);
    for (const auto & b : partition_rows(37, width)) k.middleRows(b.start, b.width) = gain.block(b);
    CHECK(max_abs(k - expected) <= 1e-10);
  }
  CHECK_THROWS_AS(gain.block({30, 10}), InvalidArgument);
  ObservationSet wrong{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
  CHECK_THROWS_AS(KalmanGain(c.prior, c.pred, wrong, 1.0), DimensionMismatch);
}

TEST_CASE("observation perturbations") {
  ObservationSet obs{Eigen::VectorXd::LinSpaced(3, -1.0, 1.0), Eigen::Vector3d(0.5, 1.0, 2.0)};
  const RunSeed seed{42};
  const double alpha = 4.0;
  const Index n_e = 20000;
  const Eigen::MatrixXd d = perturb_observations(obs, alpha, n_e, seed, 1);
  for (Index j = 0; j < 3; ++j) {
    const double sd = std::sqrt(alpha) * obs.sigma_e[j];
    const Eigen::RowVectorXd row = d.row(j);
    const double mean = row.mean();
    const double var = oracle::naive_covariance(row, row);
    // Five standard errors of the mean and of the variance.
    CHECK(std::abs(mean - obs.d_obs[j]) <= 5.0 * sd / std::sqrt(n_e));
    CHECK(std::abs(var / (sd * sd) - 1.0) <= 5.0 * std::sqrt(2.0 / n_e));
  }
  // Deterministic, keyed by member, and distinct across steps.
  const Eigen::MatrixXd small = perturb_observations(obs, alpha, 10, seed, 1);
  CHECK(small == d.leftCols(10));
  CHECK(perturb_observations(obs, alpha, 10, seed, 1) == small);
  CHECK(perturb_observations(obs, alpha, 10, seed, 2) != small);
  CHECK(perturb_observations(obs, alpha, 10, RunSeed{43}, 1) != small);
}

TEST_CASE("taper identically zero leaves the ensemble unchanged") {
  const auto c = make_linear_case(20, 6, 15, 7);
  const Ensemble out = localized_update_step(c.prior, c.pred, c.obs, 2.0, constant_taper(0.0),
                                             RunSeed{1}, 0);
  CHECK(out.values() == c.prior.values());
}

TEST_CASE("taper identically one is the plain update") {
  const auto c = make_linear_case(30, 8, 20, 17);
  const double alpha = 2.0;
  const Eigen::MatrixXd perturbed = perturb_observations(c.obs, alpha, 20, RunSeed{5}, 0);
  const Eigen::MatrixXd k = oracle::naive_gain(c.prior.values(), c.pred.values(), c.obs.sigma_e, alpha);
  const Eigen::MatrixXd expected = c.prior.values() + k * (perturbed - c.pred.values());
  for (Index width : {1, 4, 1024}) {
    const Ensemble out = localized_update_step(c.prior, c.pred, c.obs, alpha, constant_taper(1.0),
                                               perturbed, width);
    CHECK(max_abs(out.values() - expected) <= 1e-10);
  }
  // The default policy means no localization.
  const Localizer none(LocalizationPolicy{}, c.prior, c.pred);
  const Ensemble via_policy = localized_update_step(c.prior, c.pred, c.obs, alpha, none.provider(),
                                                    perturbed);
  CHECK(max_abs(via_policy.values() - expected) <= 1e-10);
}

TEST_CASE("update scales linearly with a constant taper") {
  const auto c = make_linear_case(12, 5, 30, 27);
  const Eigen::MatrixXd perturbed = perturb_observations(c.obs, 4.0, 30, RunSeed{2}, 0);
  const Eigen::MatrixXd full =
      localized_update_step(c.prior, c.pred, c.obs, 4.0, constant_taper(1.0), perturbed).values() -
      c.prior.values();
  double previous = 0.0;
  for (double r : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const Eigen::MatrixXd delta =
        localized_update_step(c.prior, c.pred, c.obs, 4.0, constant_taper(r), perturbed).values() -
        c.prior.values();
    CHECK(max_abs(delta - r * full) <= 1e-12);
    CHECK(delta.norm() >= previous);
    previous = delta.norm();
  }
}

TEST_CASE("taper entries act elementwise on the gain") {
  const auto c = make_linear_case(9, 4, 12, 31);
  const Eigen::MatrixXd perturbed = perturb_observations(c.obs, 1.0, 12, RunSeed{3}, 0);
  Eigen::MatrixXd r(9, 4);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index i = 0; i < r.size(); ++i) r.data()[i] = unit(gen);
  const Eigen::MatrixXd k = oracle::naive_gain(c.prior.values(), c.pred.values(), c.obs.sigma_e, 1.0);
  const Eigen::MatrixXd expected =
      c.prior.values() + k.cwiseProduct(r) * (perturbed - c.pred.values());
  const Ensemble out =
      localized_update_step(c.prior, c.pred, c.obs, 1.0, dense_taper(r), perturbed, 2);
  CHECK(max_abs(out.values() - expected) <= 1e-10);
}

TEST_CASE("update is invariant to rescaling the data") {
  const auto c = make_linear_case(15, 6, 20, 41);
  const Eigen::MatrixXd perturbed = perturb_observations(c.obs, 2.0, 20, RunSeed{9}, 0);
  const Ensemble base = localized_update_step(c.prior, c.pred, c.obs, 2.0, constant_taper(1.0),
                                              perturbed);
  for (double s : {1e-3, 7.5, 1e4}) {
    const PredictedEnsemble pred(s * c.pred.values());
    const ObservationSet obs{s * c.obs.d_obs, s * c.obs.sigma_e};
    const Ensemble scaled = localized_update_step(c.prior, pred, obs, 2.0, constant_taper(1.0),
                                                  Eigen::MatrixXd(s * perturbed));
    CHECK(max_abs(scaled.values() - base.values()) <= 1e-9 * (1.0 + max_abs(base.values())));
  }
}

TEST_CASE("correlation tapers match per-pair evaluation") {
  const auto c = make_linear_case(40, 7, 30, 51);
  const Eigen::MatrixXd rho = oracle::naive_correlations(c.prior.values(), c.pred.values());
  for (const char * text : {"mse", "power:beta=3,t0=2", "logistic:gamma=1.5,t0=2,eps=0.01",
                            "discrepancy:eta=0.5", "cgc:theta=sigma", "po", "mpo"}) {
    LocalizationPolicy policy;
    policy.spec = taper::parse_taper_spec(text);
    const Localizer loc(policy, c.prior, c.pred, 9);
    const Eigen::MatrixXd r = loc.rows({0, 40});
    for (Index i = 0; i < 40; ++i) {
      for (Index j = 0; j < 7; ++j) {
        taper::CorrelationStats stats;
        stats.rho_hat = rho(i, j);
        stats.n_e = 30;
        CHECK(r(i, j) == Approx(taper::evaluate_taper(policy.spec, stats)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("threshold strategies") {
  auto c = make_linear_case(60, 6, 40, 61);
  std::vector<DatumInfo> data(6);
  for (int j = 0; j < 6; ++j) {
    data[j].source = j < 4 ? "A" : "B";
    data[j].kind = "y";
  }
  const PredictedEnsemble pred(c.pred.values(), data);

  LocalizationPolicy policy;
  policy.spec = taper::Logistic{};
  policy.t0_strategy = significance::StudentT0{0.05};
  const Localizer student(policy, c.prior, pred);
  for (double t0 : student.datum_t0()) CHECK(t0 == significance::critical_t0(40, 0.05));

  policy.t0_strategy = significance::PercentileT0{0.8};
  const Localizer pct(policy, c.prior, pred, 7);
  const Eigen::MatrixXd rho = oracle::naive_correlations(c.prior.values(), c.pred.values());
  for (const auto & [lo, hi] : {std::pair{0, 4}, std::pair{4, 6}}) {
    std::vector<double> t;
    for (int j = lo; j < hi; ++j) {
      for (Index i = 0; i < 60; ++i) {
        t.push_back(std::abs(rho(i, j)) * std::sqrt(39.0) / (1.0 - rho(i, j) * rho(i, j)));
      }
    }
    const double expected = significance::adaptive_t0(t, 0.8);
    for (int j = lo; j < hi; ++j) CHECK(pct.datum_t0()[j] == Approx(expected).epsilon(1e-10));
  }

  policy.t0_strategy = significance::FixedT0{3.5};
  const Localizer fixed(policy, c.prior, pred);
  for (double t0 : fixed.datum_t0()) CHECK(t0 == 3.5);
}

TEST_CASE("constant parameter rows get zero taper and stay put") {
  auto c = make_linear_case(10, 4, 20, 71);
  Eigen::MatrixXd m = c.prior.values();
  m.row(3).setConstant(2.0);
  const Ensemble prior(m);
  LocalizationPolicy policy;
  policy.spec = taper::Mse{};
  const Localizer loc(policy, prior, c.pred);
  CHECK(loc.rows({3, 1}).isZero());
  const Ensemble out = localized_update_step(prior, c.pred, c.obs, 1.0, loc.provider(),
                                             RunSeed{4}, 0);
  CHECK((out.values().row(3).array() == 2.0).all());
}

TEST_CASE("distance taper needs geometry") {
  const auto c = make_linear_case(4, 2, 10, 81);
  LocalizationPolicy policy;
  policy.spec = taper::DistanceGC{5.0, 5.0, 0.0};
  CHECK_THROWS_AS(Localizer(policy, c.prior, c.pred), InvalidArgument);

  std::vector<ParameterInfo> params(4);
  for (int i = 0; i < 4; ++i) params[i].cell = GridCell{i * 3, 0, 0};
  std::vector<DatumInfo> data(2);
  data[0].location = std::make_pair(0.0, 0.0);
  data[1].location = std::make_pair(9.0, 0.0);
  const Localizer loc(policy, Ensemble(c.prior.values(), params),
                      PredictedEnsemble(c.pred.values(), data));
  const Eigen::MatrixXd r = loc.rows({0, 4});
  CHECK(r(0, 0) == 1.0);
  CHECK(r(3, 1) == 1.0);
  CHECK(r(1, 0) == Approx(taper::gaspari_cohn(0.6)));
  CHECK(r(3, 0) == Approx(taper::gaspari_cohn(1.8)));
}

// -----------------------------------------------------------------------------

TEST_CASE("frozen tapers are computed once from the prior") {
  const auto c = make_linear_case(25, 6, 30, 91);
  const LinearModel model(c.g);
  LocalizationPolicy policy;
  policy.spec = taper::Logistic{};
  policy.t0_strategy = significance::PercentileT0{0.5};
  const Localizer reference(policy, c.prior, evaluate_ensemble(model, c.prior));
  const Eigen::MatrixXd expected = reference.rows({0, 25});

  std::vector<Eigen::MatrixXd> seen;
  EsmdaOptions options;
  options.on_localizer = [&](int, const Localizer & loc) {seen.push_back(loc.rows({0, 25}));};
  const auto frozen = run_esmda(c.prior, model, c.obs, MdaSchedule::uniform(4), policy, RunSeed{3},
                                options);
  REQUIRE(seen.size() == 4);
  for (const auto & r : seen) CHECK(r == expected);
  for (int s = 2; s <= 4; ++s) CHECK(frozen.steps[s].n_eff == frozen.steps[1].n_eff);

  seen.clear();
  policy.freeze = false;
  const auto live = run_esmda(c.prior, model, c.obs, MdaSchedule::uniform(4), policy, RunSeed{3},
                              options);
  REQUIRE(seen.size() == 4);
  CHECK(seen[0] == expected);
  CHECK(seen[1] != expected);
  CHECK(live.posterior.values() != frozen.posterior.values());
}

TEST_CASE("results do not depend on block width") {
  const auto c = make_linear_case(53, 9, 25, 101);
  const LinearModel model(c.g);
  LocalizationPolicy policy;
  policy.spec = taper::parse_taper_spec("logistic:gamma=1.5,t0=2,eps=0.01");
  policy.t0_strategy = significance::PercentileT0{0.9};
  std::vector<Eigen::MatrixXd> posteriors;
  for (Index width : {1, 8, 53, 1024}) {
    EsmdaOptions options;
    options.block_width = width;
    posteriors.push_back(run_esmda(c.prior, model, c.obs, MdaSchedule::uniform(3), policy,
                                   RunSeed{11}, options).posterior.values());
  }
  for (const auto & p : posteriors) CHECK(max_abs(p - posteriors.front()) <= 1e-12);
}

TEST_CASE("run diagnostics") {
  const auto c = make_linear_case(30, 10, 40, 111);
  const LinearModel model(c.g);
  int calls = 0;
  EsmdaOptions options;
  options.on_step = [&](int step, const Ensemble & ens, const PredictedEnsemble & pred) {
    CHECK(step == calls++);
    CHECK(max_abs(pred.values() - c.g * ens.values()) <= 1e-12);
  };
  const auto result = run_esmda(c.prior, model, c.obs, MdaSchedule::uniform(4),
                                LocalizationPolicy{}, RunSeed{8}, options);
  CHECK(calls == 5);
  REQUIRE(result.steps.size() == 5);
  CHECK(std::isnan(result.steps[0].n_eff));
  CHECK(result.steps[0].nv == 1.0);
  CHECK(result.steps[0].obj_mean == Approx(metrics::objective_function(c.pred, c.obs)));
  for (int s = 1; s <= 4; ++s) {
    CHECK(result.steps[s].chi == 1.0);
    CHECK(result.steps[s].nv < 1.0);
    CHECK(result.steps[s].taper_histogram.back() == 300u);
  }
  CHECK(result.steps[4].obj_mean < result.steps[0].obj_mean);
  CHECK(result.datum_t0.empty());
  // Same seed, same answer.
  const auto again = run_esmda(c.prior, model, c.obs, MdaSchedule::uniform(4),
                               LocalizationPolicy{}, RunSeed{8});
  CHECK(again.posterior.values() == result.posterior.values());
}

TEST_CASE("linear-Gaussian posterior") {
  // m ~ N(0, 1), d = m, sigma_e = 0.5: posterior N(0.8 d_obs, 0.2).
  const int n_e = 20000;
  const Ensemble prior(oracle::random_matrix(1, n_e, 2024));
  const LinearModel model(Eigen::MatrixXd::Ones(1, 1));
  const ObservationSet obs{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 0.5)};
  const auto result = run_esmda(prior, model, obs, MdaSchedule::uniform(4), LocalizationPolicy{},
                                RunSeed{6});
  const Eigen::RowVectorXd post = result.posterior.values().row(0);
  const double mean = post.mean();
  const double var = oracle::naive_covariance(post, post);
  CHECK(mean == Approx(0.8).epsilon(0.03));
  CHECK(var == Approx(0.2).epsilon(0.05));
}

TEST_CASE("update step input checks") {
  const auto c = make_linear_case(5, 3, 10, 121);
  CHECK_THROWS_AS(localized_update_step(c.prior, c.pred, c.obs, 1.0, constant_taper(1.0),
                                        Eigen::MatrixXd::Zero(3, 9)),
                  DimensionMismatch);
  CHECK_THROWS_AS(constant_taper(1.5), InvalidArgument);
  CHECK_THROWS_AS(localized_update_step(c.prior, c.pred, c.obs, 0.0, constant_taper(1.0),
                                        RunSeed{1}, 0),
                  InvalidArgument);
}
