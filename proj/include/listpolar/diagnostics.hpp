#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "listpolar/dgp.hpp"
#include "listpolar/errors.hpp"
#include "listpolar/math.hpp"
#include "listpolar/stats.hpp"

namespace listpolar {

struct TestResult {
  double statistic = 0.0;  // z-score
  double p_value = 1.0;
  std::size_t n_confessors_treat = 0;
  std::size_t n_confessors_control = 0;
  double dim_confessors = 0.0;
};

/// Joint placebo test. Among respondents who confess on the direct question,
/// monotonicity and no-liars imply every confessor holds the trait, so the
/// treated-minus-control list difference in that stratum must equal 1.
inline TestResult placebo_test(const Dataset& ds) {
  if (!ds.has_direct) throw InputError("placebo_test: dataset has no direct answers");
  const auto [treated, control] =
      detail::arm_counts(ds, [](const Respondent& r) { return r.d == 1; });
  if (treated.n < 2 || control.n < 2) throw TestInapplicable(treated.n, control.n);

  TestResult out;
  out.n_confessors_treat = treated.n;
  out.n_confessors_control = control.n;
  out.dim_confessors = treated.mean - control.mean;
  const double se = detail::welch_se(treated, control);
  const double gap = out.dim_confessors - 1.0;
  if (se > 0.0) {
    out.statistic = gap / se;
  } else if (gap == 0.0) {
    out.statistic = 0.0;
  } else {
    out.statistic = std::copysign(std::numeric_limits<double>::infinity(), gap);
  }
  out.p_value = two_sided_p(out.statistic);
  return out;
}

/// Largest list count the design admits for a treated respondent. With the
/// always-zero item appended this count is unattainable.
inline int declared_max_count(const ScenarioConfig& cfg) { return cfg.listed_items() + 1; }

/// Treated respondents who report every item yet deny the trait directly.
inline std::vector<std::size_t> detect_top_coders(const Dataset& ds) {
  std::vector<std::size_t> ids;
  if (!ds.has_direct) return ids;
  const int top = declared_max_count(ds.config);
  for (const Respondent& r : ds.respondents) {
    if (r.treat == 1 && r.y == top && r.d == 0) ids.push_back(r.id);
  }
  return ids;
}

struct ExtremeResponseSummary {
  double bottom_control = 0.0;
  double top_control = 0.0;
  double bottom_treat = 0.0;
  double top_treat = 0.0;
};

// Shares of floor (0) and ceiling (declared maximum) counts per arm.
inline ExtremeResponseSummary extreme_response_summary(const Dataset& ds) {
  const int control_max = ds.config.listed_items();
  std::size_t n_t = 0, n_c = 0, bot_t = 0, bot_c = 0, top_t = 0, top_c = 0;
  for (const Respondent& r : ds.respondents) {
    if (r.treat == 1) {
      ++n_t;
      bot_t += r.y == 0;
      top_t += r.y == control_max + 1;
    } else {
      ++n_c;
      bot_c += r.y == 0;
      top_c += r.y == control_max;
    }
  }
  if (n_t == 0 || n_c == 0) throw InputError("extreme_response_summary: both arms must be non-empty");
  const double nt = static_cast<double>(n_t);
  const double nc = static_cast<double>(n_c);
  return {bot_c / nc, top_c / nc, bot_t / nt, top_t / nt};
}

}  // namespace listpolar
