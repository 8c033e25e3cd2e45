#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace listpolar {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

inline double log_sigmoid(double x) { return -softplus(-x); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double log_sum_exp(double a, double b) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Two-sided normal p-value for a z statistic.
inline double two_sided_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

/// Physicists' Gauss-Hermite rule: integral of exp(-t^2) f(t) dt ~= sum w_i f(t_i).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Orthonormal Hermite polynomial h_n(z) and its derivative.
inline std::pair<double, double> hermite_orthonormal(std::size_t n, double z) {
  double p1 = std::pow(std::numbers::pi, -0.25);
  double p2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p3 = p2;
    p2 = p1;
    const double jd = static_cast<double>(j);
    p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
  }
  return {p1, std::sqrt(2.0 * static_cast<double>(n)) * p2};
}

}  // namespace detail

/// Computes an n-point rule. Positive roots of h_n are bracketed by a sign
/// scan finer than the smallest root spacing, then bisected to full precision.
inline GaussHermiteRule gauss_hermite_rule(std::size_t n) {
  if (n == 0 || n > 400) throw std::invalid_argument("gauss_hermite_rule: n must lie in [1, 400]");
  const double nd = static_cast<double>(n);
  const double upper = std::sqrt(2.0 * nd + 1.0) + 1.0;
  const double step = 0.02 / std::sqrt(2.0 * nd + 1.0);

  std::vector<double> positive;
  double lo = n % 2 == 1 ? step : 0.0;
  double f_lo = detail::hermite_orthonormal(n, lo).first;
  for (double hi = lo + step; hi <= upper; hi += step) {
    const double f_hi = detail::hermite_orthonormal(n, hi).first;
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      double a = lo, b = hi, fa = f_lo;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = detail::hermite_orthonormal(n, mid).first;
        if ((fa < 0.0) == (fm < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      positive.push_back(0.5 * (a + b));
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (positive.size() != n / 2) throw std::runtime_error("gauss_hermite_rule: root scan failed");

  GaussHermiteRule rule;
  auto add = [&](double z) {
    const double pp = detail::hermite_orthonormal(n, z).second;
    rule.nodes.push_back(z);
    rule.weights.push_back(2.0 / (pp * pp));
  };
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) add(*it);
  if (n % 2 == 1) add(0.0);
  for (double z : positive) add(-z);
  return rule;
}

inline constexpr std::size_t kQuadratureNodes = 100;

inline const GaussHermiteRule& default_hermite_rule() {
  static const GaussHermiteRule rule = gauss_hermite_rule(kQuadratureNodes);
  return rule;
}

/// E[f(X)] for X ~ N(0, 1) by Gauss-Hermite quadrature.
template <typename F>
double normal_expectation(F&& f, const GaussHermiteRule& rule = default_hermite_rule()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(std::numbers::sqrt2 * rule.nodes[i]);
  }
  return acc / std::sqrt(std::numbers::pi);
}

/// Mean of sigmoid(intercept + slope * X) over X ~ N(0, 1).
inline double logistic_normal_mean(double intercept, double slope) {
  return normal_expectation([=](double x) { return sigmoid(intercept + slope * x); });
}

}  // namespace listpolar
