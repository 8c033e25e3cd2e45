#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "listpolar/dgp.hpp"
#include "oracles.hpp"

using namespace listpolar;

TEST(Calibration, ZeroSlopeIsLogit) {
  EXPECT_NEAR(calibrate_intercept(0.25, 0.0), std::log(0.25 / 0.75), 1e-8);
  EXPECT_NEAR(calibrate_intercept(0.25, 0.0), -1.098612, 1e-6);
}

TEST(Calibration, SymmetricTarget) { EXPECT_NEAR(calibrate_intercept(0.5, 1.0), 0.0, 1e-8); }

// Brute-force oracle: bisect on the mean of sigmoid(b + x) over 10^7 draws.
// Frozen result: -1.315191 (seed 12345). Quadrature must agree to 3 decimals.
TEST(Calibration, AgreesWithMonteCarloOracle) {
  const double b = calibrate_intercept(0.25, 1.0);
  EXPECT_NEAR(b, -1.315191, 1e-3);
  EXPECT_NEAR(b, -1.3149122390, 1e-8);
  EXPECT_NEAR(logistic_normal_mean(b, 1.0), 0.25, 1e-8);
}

TEST(Calibration, MonteCarloOracleSmallSample) {
  // The same oracle recomputed live on 2*10^5 draws, tolerance widened to its MC error.
  const auto draws = oracle::normal_draws(200000, 99);
  const double b_mc = oracle::mc_calibrate(draws, 0.25, 1.0, -3.0, 1.0);
  EXPECT_NEAR(calibrate_intercept(0.25, 1.0), b_mc, 0.01);
}

TEST(Calibration, NegativeSlopeGivesSameIntercept) {
  EXPECT_NEAR(calibrate_intercept(0.25, -1.0), calibrate_intercept(0.25, 1.0), 1e-10);
}

TEST(Calibration, RejectsBadInput) {
  EXPECT_THROW(calibrate_intercept(0.0, 1.0), CalibrationError);
  EXPECT_THROW(calibrate_intercept(1.0, 1.0), CalibrationError);
  EXPECT_THROW(calibrate_intercept(0.3, std::nan("")), CalibrationError);
}

TEST(Scenario, ValidateRequiresCalibration) {
  ScenarioConfig cfg;
  EXPECT_THROW(validate(cfg), ConfigError);
  calibrate(cfg);
  EXPECT_NO_THROW(validate(cfg));
  cfg.group_b_share = 0.6;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Scenario, IdsAndModeNames) {
  EXPECT_EQ(make_scenario_id(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.25),
            "opposite_same_b0.25");
  EXPECT_EQ(parse_polarity_mode("nonsensitive"), PolarityMode::NonSensitiveB);
  EXPECT_EQ(parse_polarity_mode("NonSensitiveB"), PolarityMode::NonSensitiveB);
  EXPECT_EQ(parse_covariate_mode("OppositeEffect"), CovariateMode::OppositeEffect);
  EXPECT_THROW(parse_covariate_mode("reverse"), ConfigError);
}

TEST(DirectResponse, GroupANonHolderNeverConfesses) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.2);
  Respondent r;
  r.x1 = 0;
  r.z = 0;
  for (double x3 : {-3.0, 0.0, 4.0}) {
    r.x3 = x3;
    for (double u : {0.0, 0.3, 0.99}) EXPECT_EQ(simulate_direct_response(r, cfg, u), 0);
  }
}

TEST(DirectResponse, NonSensitiveGroupIsTruthful) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::NonSensitiveB, CovariateMode::SameEffect, 0.2);
  Respondent r;
  r.x1 = 1;
  for (int z : {0, 1}) {
    r.z = z;
    for (double u : {0.0, 0.5, 0.99}) EXPECT_EQ(simulate_direct_response(r, cfg, u), z);
  }
}

TEST(DirectResponse, OppositeGroupHoldersAlwaysConfess) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.2);
  Respondent r;
  r.x1 = 1;
  r.z = 1;
  for (double u : {0.0, 0.5, 0.99}) EXPECT_EQ(simulate_direct_response(r, cfg, u), 1);
}

TEST(DirectResponse, LieRateMatchesLogistic) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  Respondent r;
  r.x1 = 0;
  r.z = 1;
  r.x3 = 0.0;
  std::mt19937_64 rng(7);
  const int n = 1000000;
  int lies = 0;
  for (int i = 0; i < n; ++i) lies += simulate_direct_response(r, cfg, rng) == 0;
  const double p = oracle::logistic(1.0);
  EXPECT_NEAR(p, 0.7311, 1e-4);
  EXPECT_NEAR(static_cast<double>(lies) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Generate, Deterministic) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::OppositeEffect, 0.3);
  const Dataset a = generate_dataset(cfg, 42);
  const Dataset b = generate_dataset(cfg, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a.respondents[i];
    const auto& q = b.respondents[i];
    EXPECT_TRUE(p.x1 == q.x1 && p.x2 == q.x2 && p.x3 == q.x3 && p.z == q.z && p.treat == q.treat &&
                p.y == q.y && p.d == q.d);
  }
  const Dataset c = generate_dataset(cfg, 43);
  EXPECT_NE(a.respondents[0].x2, c.respondents[0].x2);
}

TEST(Generate, ShareZeroHasNoGroupB) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.0);
  const Dataset ds = generate_dataset(cfg, 5);
  for (const auto& r : ds.respondents) ASSERT_EQ(r.x1, 0);
}

TEST(Generate, ExactArmSizes) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::NonSensitiveB, CovariateMode::SameEffect, 0.5);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset ds = generate_dataset(cfg, seed);
    int treated = 0;
    for (const auto& r : ds.respondents) treated += r.treat;
    EXPECT_EQ(ds.size(), 2000u);
    EXPECT_EQ(treated, 1000);
  }
}

TEST(Generate, GroupPrevalenceWithinSamplingBound) {
  for (CovariateMode c : {CovariateMode::SameEffect, CovariateMode::OppositeEffect}) {
    const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, c, 0.5);
    const Dataset ds = generate_dataset(cfg, 2024);
    double z[2] = {0, 0};
    double n[2] = {0, 0};
    for (const auto& r : ds.respondents) {
      z[r.x1] += r.z;
      n[r.x1] += 1;
    }
    for (int g = 0; g < 2; ++g) {
      EXPECT_NEAR(z[g] / n[g], 0.25, 3.0 * std::sqrt(0.25 * 0.75 / n[g])) << "group " << g;
    }
  }
}

TEST(Generate, ListDecompositionAndMonotonicity) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.4);
  const Dataset ds = generate_dataset(cfg, 11);
  for (const auto& r : ds.respondents) {
    const int control = r.y - r.treat * r.z;
    ASSERT_GE(control, 0);
    ASSERT_LE(control, cfg.j_items);
    if (r.x1 == 0) {
      ASSERT_FALSE(r.z == 0 && r.d == 1);
    } else {
      ASSERT_FALSE(r.z == 1 && r.d == 0);
    }
  }
}

TEST(Generate, DirectRatesMatchAnalyticOracle) {
  // E[d | A] = 0.25 (1 - lbar); E[d | B, opposite] = 0.25 + 0.75 lbar.
  ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.5);
  cfg.n_total = 200000;
  cfg.n_treatment = 100000;
  const Dataset ds = generate_dataset(cfg, 77);
  const double lbar = mean_lie_rate(cfg);
  double d[2] = {0, 0};
  double n[2] = {0, 0};
  for (const auto& r : ds.respondents) {
    d[r.x1] += r.d;
    n[r.x1] += 1;
  }
  const double expect[2] = {0.25 * (1 - lbar), 0.25 + 0.75 * lbar};
  for (int g = 0; g < 2; ++g) {
    EXPECT_NEAR(d[g] / n[g], expect[g], 3.0 * std::sqrt(expect[g] * (1 - expect[g]) / n[g]));
  }
}

TEST(Generate, CovariatesBalancedAcrossArms) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.3);
  ScenarioConfig big = cfg;
  big.n_total = 100000;
  big.n_treatment = 50000;
  const Dataset ds = generate_dataset(big, 3);
  double s[2][4] = {};
  for (const auto& r : ds.respondents) {
    s[r.treat][0] += r.x1;
    s[r.treat][1] += r.x2;
    s[r.treat][2] += r.x3;
    s[r.treat][3] += r.z;
  }
  // sd of each variable is at most 1; difference of two means of 50000 each.
  const double se = std::sqrt(2.0 / 50000.0);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s[1][k] / 50000, s[0][k] / 50000, 4.0 * se) << k;
}
