#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "listpolar/estimators.hpp"
#include "listpolar/montecarlo.hpp"

using namespace listpolar;

TEST(DiM, TrivialShift) {
  const Dataset ds = fixtures::make_dataset({{1, 3, 0}, {1, 3, 0}, {1, 3, 1}, {0, 2, 0}, {0, 2, 1}});
  const EstimateResult r = estimate_dim(ds);
  EXPECT_EQ(r.estimator, EstimatorKind::DiM);
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  EXPECT_DOUBLE_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.n_used, 5u);
}

TEST(DiM, IdenticalArmsGiveZero) {
  const Dataset ds = fixtures::make_dataset({{1, 0, 0}, {1, 2, 0}, {1, 4, 0}, {0, 4, 0}, {0, 2, 0}, {0, 0, 0}});
  const EstimateResult r = estimate_dim(ds);
  EXPECT_DOUBLE_EQ(r.estimate, 0.0);
  // Welch: sqrt(4/3 + 4/3)
  EXPECT_NEAR(r.std_error, std::sqrt(8.0 / 3.0), 1e-14);
}

TEST(DiM, EmptyArmIsAnError) {
  EXPECT_THROW(estimate_dim(fixtures::make_dataset({{1, 1, 0}, {1, 2, 0}})), InputError);
  EXPECT_THROW(estimate_sensitivity_bias(fixtures::make_dataset({{0, 1, 0}})), InputError);
}

TEST(Direct, TrivialCases) {
  EXPECT_DOUBLE_EQ(estimate_direct_prevalence(fixtures::make_dataset({{1, 1, 1}, {0, 2, 1}})).estimate, 1.0);
  const EstimateResult none = estimate_direct_prevalence(fixtures::make_dataset({{1, 1, 0}, {0, 2, 0}}));
  EXPECT_DOUBLE_EQ(none.estimate, 0.0);
  EXPECT_DOUBLE_EQ(none.std_error, 0.0);
}

TEST(Direct, GroupAOnlyMatchesLieOracle) {
  ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  cfg.n_total = 400000;
  cfg.n_treatment = 200000;
  const Dataset ds = generate_dataset(cfg, 17);
  const double expect = 0.25 * (1.0 - mean_lie_rate(cfg));
  const EstimateResult r = estimate_direct_prevalence(ds);
  EXPECT_NEAR(r.estimate, expect, 3.0 * std::sqrt(expect * (1 - expect) / cfg.n_total));
}

TEST(SensitivityBias, IsDimMinusDirect) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.2);
  const Dataset ds = generate_dataset(cfg, 3);
  const auto dim = estimate_dim(ds);
  const auto direct = estimate_direct_prevalence(ds);
  const auto sb = estimate_sensitivity_bias(ds);
  EXPECT_DOUBLE_EQ(sb.estimate, dim.estimate - direct.estimate);
  EXPECT_DOUBLE_EQ(sb.std_error, std::hypot(dim.std_error, direct.std_error));
}

// Closed forms: opposite polarity lbar (0.25 - p), non-sensitive B (1 - p) 0.25 lbar.
TEST(SensitivityBias, MatchesClosedFormAtLargeN) {
  for (PolarityMode mode : {PolarityMode::OppositePolarity, PolarityMode::NonSensitiveB}) {
    for (double p : {0.1, 0.4}) {
      ScenarioConfig cfg = make_scenario(mode, CovariateMode::SameEffect, p);
      cfg.n_total = 1000000;
      cfg.n_treatment = 500000;
      const double lbar = mean_lie_rate(cfg);
      const double expect = mode == PolarityMode::OppositePolarity ? lbar * (0.25 - p)
                                                                    : (1 - p) * 0.25 * lbar;
      const EstimateResult r = estimate_sensitivity_bias(generate_dataset(cfg, 101));
      EXPECT_NEAR(r.estimate, expect, 3.0 * r.std_error) << to_string(mode) << " p=" << p;
    }
  }
}

TEST(StandardMl, RecoversPrevalenceWithoutCovariateEffects) {
  ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  cfg.beta2_a = 0.0;
  calibrate(cfg);
  double sum = 0.0;
  const int reps = 40;
  for (int k = 0; k < reps; ++k) sum += estimate_standard_ml(generate_dataset(cfg, 500 + k)).prevalence;
  EXPECT_NEAR(sum / reps, 0.25, 0.02);
}

TEST(StandardMl, DegenerateCovariates) {
  ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  Dataset ds = generate_dataset(cfg, 21);
  for (auto& r : ds.respondents) r.x2 = r.x3 = 0.0;
  const MlFit fit = estimate_standard_ml(ds);
  const EstimateResult dim = estimate_dim(ds);
  EXPECT_TRUE(fit.converged);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(fit.delta[k], 0.0, 1e-6);
  EXPECT_NEAR(fit.prevalence, dim.estimate, 2.0 * dim.std_error);
  EXPECT_FALSE(fit.kappa.has_value());
}

TEST(CombinedMl, RequiresDirectAnswers) {
  Dataset ds = fixtures::make_dataset({{1, 1, 0}, {0, 1, 0}});
  ds.has_direct = false;
  EXPECT_THROW(estimate_combined_ml(ds), InputError);
}

TEST(CombinedMl, RejectsTopCodersUnlessZeroItemAppended) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  Dataset ds = generate_dataset(cfg, 4);
  auto it = std::find_if(ds.respondents.begin(), ds.respondents.end(),
                         [](const Respondent& r) { return r.treat == 1 && r.d == 0; });
  ASSERT_NE(it, ds.respondents.end());
  it->y = 5;
  EXPECT_THROW(estimate_combined_ml(ds), InputError);
  EXPECT_NO_THROW(estimate_combined_ml(with_zero_item(ds)));
}

TEST(CombinedMl, FitIsAtLeastAsGoodAsTruth) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = with_zero_item(generate_dataset(cfg, 900 + seed));
    const MlFit fit = estimate_combined_ml(ds);
    ASSERT_TRUE(fit.kappa.has_value());
    EXPECT_EQ(fit.kappa->size(), 4u);
    EXPECT_GE(fit.prevalence, 0.0);
    EXPECT_LE(fit.prevalence, 1.0);
    const CombinedLikelihood lik(ds, MisreportCovariates::Full);
    const Vector truth{cfg.beta0_a, 0.0, cfg.beta2_a, 0.0, 0.0, 0.0, 0.0, 0.0,
                       cfg.alpha0,  0.0, 0.0,         cfg.alpha3};
    Vector grad(truth.size());
    EXPECT_GE(fit.loglik, lik(truth, grad)) << "seed " << seed;
  }
}

TEST(CombinedMl, InterceptX3Option) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  FitOptions opts;
  opts.misreport = MisreportCovariates::InterceptX3;
  const MlFit fit = estimate_combined_ml(with_zero_item(generate_dataset(cfg, 6)), opts);
  ASSERT_TRUE(fit.kappa.has_value());
  EXPECT_EQ(fit.kappa->size(), 2u);
  EXPECT_TRUE(fit.converged);
}

// 200 replicates with uniform polarity: every estimator is consistent here.
TEST(Estimators, UniformPolarityTwoHundredReps) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  const auto records = run_scenario(cfg, 200, 20240501);
  double dim = 0, ml = 0, cml = 0, b2 = 0;
  for (const auto& r : records) {
    dim += r.dim_estimate;
    ml += r.standard_ml_prevalence;
    cml += r.combined_ml_prevalence;
    b2 += r.standard_ml_delta[2];
  }
  EXPECT_NEAR(dim / 200, 0.25, 0.01);
  EXPECT_NEAR(cml / 200, 0.25, 0.02);
  EXPECT_NEAR(ml / 200, 0.25, 0.015);
  EXPECT_NEAR(b2 / 200, 1.0, 0.15);
}
