#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "listpolar/dgp.hpp"

namespace listpolar {

namespace detail {

struct ArmMoments {
  double mean = 0.0;
  double var = 0.0;  // sample variance (n - 1)
  std::size_t n = 0;
};

template <typename Pred, typename Value>
ArmMoments moments(const Dataset& ds, Pred&& keep, Value&& value) {
  ArmMoments m;
  double sum = 0.0;
  for (const Respondent& r : ds.respondents) {
    if (!keep(r)) continue;
    sum += value(r);
    ++m.n;
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0.0;
  for (const Respondent& r : ds.respondents) {
    if (!keep(r)) continue;
    const double dv = value(r) - m.mean;
    ss += dv * dv;
  }
  m.var = m.n > 1 ? ss / static_cast<double>(m.n - 1) : 0.0;
  return m;
}

// Count moments of the treated and control arms restricted to respondents passing `keep`.
template <typename Pred>
std::pair<ArmMoments, ArmMoments> arm_counts(const Dataset& ds, Pred&& keep) {
  auto count = [](const Respondent& r) { return static_cast<double>(r.y); };
  return {moments(ds, [&](const Respondent& r) { return r.treat == 1 && keep(r); }, count),
          moments(ds, [&](const Respondent& r) { return r.treat == 0 && keep(r); }, count)};
}

inline double welch_se(const ArmMoments& a, const ArmMoments& b) {
  return std::sqrt(a.var / static_cast<double>(a.n) + b.var / static_cast<double>(b.n));
}

}  // namespace detail

}  // namespace listpolar
