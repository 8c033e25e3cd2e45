#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "listpolar/diagnostics.hpp"
#include "listpolar/dgp.hpp"
#include "listpolar/likelihood.hpp"
#include "listpolar/optim.hpp"
#include "listpolar/stats.hpp"

namespace listpolar {

enum class EstimatorKind { DiM, Direct, StandardML, CombinedML, SensitivityBias };

inline std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::DiM: return "dim";
    case EstimatorKind::Direct: return "direct";
    case EstimatorKind::StandardML: return "standard_ml";
    case EstimatorKind::CombinedML: return "combined_ml";
    case EstimatorKind::SensitivityBias: return "sensitivity_bias";
  }
  return "unknown";
}

struct EstimateResult {
  EstimatorKind estimator = EstimatorKind::DiM;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_used = 0;
};

struct MlFit {
  EstimatorKind estimator = EstimatorKind::StandardML;
  Vector delta;                 // trait submodel: intercept, x1, x2, x3
  Vector gamma;                 // control-count submodel: intercept, x1, x2, x3
  std::optional<Vector> kappa;  // misreport submodel, combined ML only
  double prevalence = 0.0;
  double loglik = 0.0;
  bool converged = false;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t n_used = 0;
};

struct FitOptions {
  MultiStartOptions optimizer;
  MisreportCovariates misreport = MisreportCovariates::Full;
};

namespace detail {

inline double mean_trait_probability(const Dataset& ds, std::span<const double> delta) {
  double s = 0.0;
  for (const Respondent& r : ds.respondents) {
    const std::array<double, kCovariateDim> row{1.0, static_cast<double>(r.x1), r.x2, r.x3};
    s += sigmoid(linear(delta, row));
  }
  return s / static_cast<double>(ds.size());
}

}  // namespace detail

inline EstimateResult estimate_dim(const Dataset& ds) {
  const auto [treated, control] = detail::arm_counts(ds, [](const Respondent&) { return true; });
  if (treated.n == 0 || control.n == 0) throw InputError("estimate_dim: both arms must be non-empty");
  return {EstimatorKind::DiM, treated.mean - control.mean, detail::welch_se(treated, control),
          treated.n + control.n};
}

inline EstimateResult estimate_direct_prevalence(const Dataset& ds) {
  if (ds.size() == 0) throw InputError("estimate_direct_prevalence: empty dataset");
  if (!ds.has_direct) throw InputError("estimate_direct_prevalence: dataset has no direct answers");
  double confess = 0.0;
  for (const Respondent& r : ds.respondents) confess += r.d;
  const double n = static_cast<double>(ds.size());
  const double p = confess / n;
  return {EstimatorKind::Direct, p, std::sqrt(p * (1.0 - p) / n), ds.size()};
}

/// List prevalence minus direct prevalence. The standard error treats the two
/// components as independent, which ignores their shared respondents.
inline EstimateResult estimate_sensitivity_bias(const Dataset& ds) {
  const EstimateResult dim = estimate_dim(ds);
  const EstimateResult direct = estimate_direct_prevalence(ds);
  return {EstimatorKind::SensitivityBias, dim.estimate - direct.estimate,
          std::hypot(dim.std_error, direct.std_error), ds.size()};
}

namespace detail {

inline void require_both_arms(const Dataset& ds, const char* who) {
  bool treated = false;
  bool control = false;
  for (const Respondent& r : ds.respondents) (r.treat == 1 ? treated : control) = true;
  if (!treated || !control) throw InputError(std::string(who) + ": both arms must be non-empty");
}

inline MlFit to_fit(EstimatorKind kind, const OptimResult& opt, const Dataset& ds,
                    std::size_t n_used) {
  MlFit fit;
  fit.estimator = kind;
  fit.delta.assign(opt.argmax.begin(), opt.argmax.begin() + kCovariateDim);
  fit.gamma.assign(opt.argmax.begin() + kCovariateDim, opt.argmax.begin() + 2 * kCovariateDim);
  if (kind == EstimatorKind::CombinedML) {
    fit.kappa = Vector(opt.argmax.begin() + 2 * kCovariateDim, opt.argmax.end());
  }
  fit.prevalence = mean_trait_probability(ds, fit.delta);
  fit.loglik = opt.max_value;
  fit.converged = opt.converged;
  fit.grad_norm = opt.grad_norm;
  fit.iterations = opt.iterations;
  fit.n_used = n_used;
  return fit;
}

}  // namespace detail

/// List-only maximum likelihood: logistic trait model, binomial control count.
inline MlFit estimate_standard_ml(const Dataset& ds, const FitOptions& opts = {}) {
  detail::require_both_arms(ds, "estimate_standard_ml");
  const StandardLikelihood lik(ds);
  const OptimResult opt = maximize_multistart(lik.objective(), opts.optimizer);
  return detail::to_fit(EstimatorKind::StandardML, opt, ds, lik.n_used());
}

/// Joint list + direct maximum likelihood under monotonicity. Datasets with
/// top-coders are rejected unless the design carries the always-zero item.
inline MlFit estimate_combined_ml(const Dataset& ds, const FitOptions& opts = {}) {
  detail::require_both_arms(ds, "estimate_combined_ml");
  if (!ds.has_direct) throw InputError("estimate_combined_ml: dataset has no direct answers");
  const auto top = detect_top_coders(ds);
  if (!top.empty()) {
    throw InputError("estimate_combined_ml: " + std::to_string(top.size()) +
                     " top-coders deny the trait directly; remove them or append the "
                     "always-zero control item before fitting");
  }
  const CombinedLikelihood lik(ds, opts.misreport);
  const OptimResult opt = maximize_multistart(lik.objective(), opts.optimizer);
  return detail::to_fit(EstimatorKind::CombinedML, opt, ds, lik.n_used());
}

}  // namespace listpolar
