#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "listpolar/errors.hpp"
#include "listpolar/math.hpp"

namespace listpolar {

// Which response to the sensitive item is socially undesirable in group B.
// Group A always treats holding the trait (z = 1) as the sensitive response.
enum class PolarityMode {
  OppositePolarity,  // z = 0 is sensitive in group B
  NonSensitiveB,     // group B answers truthfully
};

// Direction of the x2 -> z effect in group B relative to group A.
enum class CovariateMode {
  SameEffect,
  OppositeEffect,
};

inline std::string_view to_string(PolarityMode m) {
  return m == PolarityMode::OppositePolarity ? "opposite" : "nonsensitive";
}

inline std::string_view to_string(CovariateMode m) {
  return m == CovariateMode::SameEffect ? "same" : "opposite";
}

inline PolarityMode parse_polarity_mode(std::string_view s) {
  if (s == "opposite" || s == "OppositePolarity") return PolarityMode::OppositePolarity;
  if (s == "nonsensitive" || s == "NonSensitiveB") return PolarityMode::NonSensitiveB;
  throw ConfigError("unknown polarity_mode '" + std::string(s) +
                    "' (expected 'opposite' or 'nonsensitive')");
}

inline CovariateMode parse_covariate_mode(std::string_view s) {
  if (s == "same" || s == "SameEffect") return CovariateMode::SameEffect;
  if (s == "opposite" || s == "OppositeEffect") return CovariateMode::OppositeEffect;
  throw ConfigError("unknown covariate_mode '" + std::string(s) +
                    "' (expected 'same' or 'opposite')");
}

inline constexpr double kCalibrationTolerance = 1e-8;

/// Returns the intercept b such that E[sigmoid(b + slope * X)] = target for
/// X ~ N(0, 1). The expectation is evaluated by Gauss-Hermite quadrature and
/// the root bracketed and bisected.
inline double calibrate_intercept(double target_prevalence, double slope) {
  if (!(target_prevalence > 0.0 && target_prevalence < 1.0)) {
    throw CalibrationError("calibrate_intercept: target prevalence must lie in (0, 1)");
  }
  if (!std::isfinite(slope)) {
    throw CalibrationError("calibrate_intercept: slope must be finite");
  }
  auto residual = [&](double b) { return logistic_normal_mean(b, slope) - target_prevalence; };

  const double centre = logit(target_prevalence);
  double width = 1.0 + std::abs(slope);
  double lo = centre - width;
  double hi = centre + width;
  int iterations = 0;
  while (residual(lo) > 0.0 || residual(hi) < 0.0) {
    width *= 2.0;
    lo = centre - width;
    hi = centre + width;
    if (++iterations > 60) throw CalibrationError("calibrate_intercept: could not bracket root");
  }

  double mid = 0.5 * (lo + hi);
  double r = residual(mid);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    r = residual(mid);
    if (std::abs(r) < 1e-13 || hi - lo < 1e-14) return mid;
    (r < 0.0 ? lo : hi) = mid;
  }
  if (std::abs(r) < kCalibrationTolerance) return mid;
  throw CalibrationError("calibrate_intercept: bisection did not converge in 200 iterations");
}

/// One cell of the simulation grid plus every data-generating coefficient.
struct ScenarioConfig {
  int n_total = 2000;
  int n_treatment = 1000;
  int j_items = 4;
  double control_item_prob = 0.5;
  double group_b_share = 0.0;
  PolarityMode polarity_mode = PolarityMode::OppositePolarity;
  CovariateMode covariate_mode = CovariateMode::SameEffect;
  double target_prevalence = 0.25;
  double beta2_a = 1.0;
  double beta0_a = 0.0;
  double beta0_b = 0.0;
  double alpha0 = 1.0;
  double alpha3 = 0.5;
  bool append_zero_item = false;
  std::string scenario_id;

  double beta2_b() const {
    return covariate_mode == CovariateMode::SameEffect ? beta2_a : -beta2_a;
  }

  // Control items shown to respondents, including the always-zero item. The
  // dummy item never contributes to a count, so estimators model j_items only.
  int listed_items() const { return j_items + (append_zero_item ? 1 : 0); }
};

inline std::string make_scenario_id(PolarityMode p, CovariateMode c, double share) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%s_b%.2f", std::string(to_string(p)).c_str(),
                std::string(to_string(c)).c_str(), share);
  return buf;
}

/// Fills beta0_a / beta0_b from the calibration equation.
inline void calibrate(ScenarioConfig& cfg) {
  cfg.beta0_a = calibrate_intercept(cfg.target_prevalence, cfg.beta2_a);
  cfg.beta0_b = calibrate_intercept(cfg.target_prevalence, cfg.beta2_b());
}

inline void validate(const ScenarioConfig& cfg) {
  if (!(cfg.group_b_share >= 0.0 && cfg.group_b_share <= 0.5)) {
    throw ConfigError("group_b_share must lie in [0, 0.5]");
  }
  if (cfg.n_total < 1) throw ConfigError("n_total must be positive");
  if (cfg.n_treatment < 0 || cfg.n_treatment > cfg.n_total) {
    throw ConfigError("n_treatment must lie in [0, n_total]");
  }
  if (cfg.j_items < 1) throw ConfigError("j_items must be at least 1");
  if (!(cfg.control_item_prob >= 0.0 && cfg.control_item_prob <= 1.0)) {
    throw ConfigError("control_item_prob must lie in [0, 1]");
  }
  if (!(cfg.target_prevalence > 0.0 && cfg.target_prevalence < 1.0)) {
    throw ConfigError("target_prevalence must lie in (0, 1)");
  }
  for (double v : {cfg.beta2_a, cfg.beta0_a, cfg.beta0_b, cfg.alpha0, cfg.alpha3}) {
    if (!std::isfinite(v)) throw ConfigError("coefficients must be finite");
  }
  const double ra = logistic_normal_mean(cfg.beta0_a, cfg.beta2_a) - cfg.target_prevalence;
  const double rb = logistic_normal_mean(cfg.beta0_b, cfg.beta2_b()) - cfg.target_prevalence;
  if (std::abs(ra) >= kCalibrationTolerance || std::abs(rb) >= kCalibrationTolerance) {
    throw ConfigError("beta0_a/beta0_b do not reproduce target_prevalence; calibrate first");
  }
}

/// Calibrated default scenario for one grid cell.
inline ScenarioConfig make_scenario(PolarityMode polarity, CovariateMode covariate,
                                    double group_b_share) {
  ScenarioConfig cfg;
  cfg.polarity_mode = polarity;
  cfg.covariate_mode = covariate;
  cfg.group_b_share = group_b_share;
  cfg.scenario_id = make_scenario_id(polarity, covariate, group_b_share);
  calibrate(cfg);
  return cfg;
}

/// Population mean of the direct-question lie probability.
inline double mean_lie_rate(const ScenarioConfig& cfg) {
  return logistic_normal_mean(cfg.alpha0, cfg.alpha3);
}

struct Respondent {
  std::size_t id = 0;
  int x1 = 0;  // 1 = group B
  double x2 = 0.0;
  double x3 = 0.0;
  int z = 0;
  int treat = 0;
  int y = 0;
  int d = 0;
};

struct Dataset {
  std::vector<Respondent> respondents;
  ScenarioConfig config;
  std::uint64_t seed = 0;
  bool has_direct = true;
  bool has_truth = true;

  std::size_t size() const { return respondents.size(); }
};

/// Copy of the dataset whose design carries one extra control item that is always 0.
inline Dataset with_zero_item(Dataset ds) {
  ds.config.append_zero_item = true;
  return ds;
}

inline double lie_probability(const ScenarioConfig& cfg, double x3) {
  return sigmoid(cfg.alpha0 + cfg.alpha3 * x3);
}

/// Direct-question answer given a uniform draw u in [0, 1). Only holders of
/// their group's sensitive response ever misreport.
inline int simulate_direct_response(const Respondent& r, const ScenarioConfig& cfg, double u) {
  const double lie = lie_probability(cfg, r.x3);
  if (r.x1 == 0) {
    if (r.z == 0) return 0;
    return u < lie ? 0 : 1;
  }
  if (cfg.polarity_mode == PolarityMode::NonSensitiveB) return r.z;
  if (r.z == 1) return 1;
  return u < lie ? 1 : 0;
}

template <typename URBG>
int simulate_direct_response(const Respondent& r, const ScenarioConfig& cfg, URBG& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return simulate_direct_response(r, cfg, unif(rng));
}

/// Draws a full survey. Deterministic in (cfg, seed) for a given standard library.
inline Dataset generate_dataset(const ScenarioConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::binomial_distribution<int> controls(cfg.j_items, cfg.control_item_prob);

  const auto n = static_cast<std::size_t>(cfg.n_total);
  Dataset ds;
  ds.config = cfg;
  ds.seed = seed;
  ds.respondents.resize(n);
  std::vector<int> control_count(n);
  std::vector<double> lie_draw(n);
  for (std::size_t i = 0; i < n; ++i) {
    Respondent& r = ds.respondents[i];
    r.id = i;
    r.x1 = unif(rng) < cfg.group_b_share ? 1 : 0;
    r.x2 = normal(rng);
    r.x3 = normal(rng);
    const double eta = r.x1 == 0 ? cfg.beta0_a + cfg.beta2_a * r.x2
                                 : cfg.beta0_b + cfg.beta2_b() * r.x2;
    r.z = unif(rng) < sigmoid(eta) ? 1 : 0;
    control_count[i] = controls(rng);
    lie_draw[i] = unif(rng);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < static_cast<std::size_t>(cfg.n_treatment); ++k) {
    ds.respondents[order[k]].treat = 1;
  }

  for (std::size_t i = 0; i < n; ++i) {
    Respondent& r = ds.respondents[i];
    r.y = control_count[i] + r.treat * r.z;
    r.d = simulate_direct_response(r, cfg, lie_draw[i]);
  }
  return ds;
}

}  // namespace listpolar
