#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "listpolar/dgp.hpp"
#include "listpolar/math.hpp"
#include "listpolar/optim.hpp"

namespace listpolar {

// Covariates entering the direct-question misreport submodel.
enum class MisreportCovariates {
  InterceptX3,  // (1, x3)
  Full,         // (1, x1, x2, x3)
};

inline constexpr std::size_t kCovariateDim = 4;  // (1, x1, x2, x3)

inline std::size_t misreport_dim(MisreportCovariates m) {
  return m == MisreportCovariates::InterceptX3 ? 2 : 4;
}

/// Log-likelihood contribution of one respondent and its derivatives with
/// respect to the three linear predictors.
struct Contribution {
  double value = 0.0;
  double d_trait = 0.0;      // d/d eta_f
  double d_control = 0.0;    // d/d eta_g
  double d_misreport = 0.0;  // d/d eta_m
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LogBinomial {
  int items;
  std::span<const double> log_choose;
  double log_g;
  double log_1mg;

  double operator()(int k) const {
    if (k < 0 || k > items) return kNegInf;
    return log_choose[static_cast<std::size_t>(k)] + k * log_g + (items - k) * log_1mg;
  }
};

inline std::vector<double> log_choose_table(int items) {
  std::vector<double> t(static_cast<std::size_t>(items) + 1);
  for (int k = 0; k <= items; ++k) {
    t[static_cast<std::size_t>(k)] =
        std::lgamma(items + 1.0) - std::lgamma(k + 1.0) - std::lgamma(items - k + 1.0);
  }
  return t;
}

}  // namespace detail

namespace detail {

// log sigmoid(eta), log(1 - sigmoid(eta)) and sigmoid(eta) from a single exp.
struct Logistic {
  double log_p;
  double log_q;
  double p;

  explicit Logistic(double eta) {
    const double e = std::exp(-std::abs(eta));
    const double l = std::log1p(e);
    if (eta >= 0.0) {
      log_p = -l;
      log_q = -eta - l;
      p = 1.0 / (1.0 + e);
    } else {
      log_p = eta - l;
      log_q = -l;
      p = e / (1.0 + e);
    }
  }
};

// log(exp(a) + exp(b)) and the weight exp(a) / (exp(a) + exp(b)).
inline std::pair<double, double> log_sum_exp_weight(double a, double b) {
  if (a == kNegInf) return {b, 0.0};
  if (b == kNegInf) return {a, 1.0};
  if (a >= b) {
    const double t = std::exp(b - a);
    return {a + std::log1p(t), 1.0 / (1.0 + t)};
  }
  const double t = std::exp(a - b);
  return {b + std::log1p(t), t / (1.0 + t)};
}

}  // namespace detail

/// List-only mixture contribution: the treated count is control count plus z.
inline Contribution standard_contribution(int treat, int y, int items,
                                          std::span<const double> log_choose, double eta_f,
                                          double eta_g) {
  const detail::Logistic g(eta_g);
  const detail::LogBinomial bin{items, log_choose, g.log_p, g.log_q};

  Contribution c;
  if (treat == 0) {
    c.value = bin(y);
    c.d_control = y - items * g.p;
    return c;
  }
  const detail::Logistic f(eta_f);
  const auto [value, w] = detail::log_sum_exp_weight(f.log_p + bin(y - 1), f.log_q + bin(y));
  c.value = value;
  c.d_trait = w - f.p;
  c.d_control = y - w - items * g.p;
  return c;
}

/// Joint list + direct contribution under monotonicity: P(d = 1 | z = 0) = 0,
/// P(d = 0 | z = 1) = m.
inline Contribution combined_contribution(int treat, int d, int y, int items,
                                          std::span<const double> log_choose, double eta_f,
                                          double eta_g, double eta_m) {
  const detail::Logistic f(eta_f);
  const detail::Logistic g(eta_g);
  const detail::Logistic m(eta_m);
  const detail::LogBinomial bin{items, log_choose, g.log_p, g.log_q};

  Contribution c;
  const int shift = treat;  // holders contribute one extra item in the treated arm
  if (d == 1) {
    c.value = f.log_p + m.log_q + bin(y - shift);
    c.d_trait = 1.0 - f.p;
    c.d_misreport = -m.p;
    c.d_control = (y - shift) - items * g.p;
    return c;
  }
  const auto [value, w] =
      detail::log_sum_exp_weight(f.log_p + m.log_p + bin(y - shift), f.log_q + bin(y));
  c.value = value;
  c.d_trait = w - f.p;
  c.d_misreport = w * (1.0 - m.p);
  c.d_control = y - shift * w - items * g.p;
  return c;
}

/// Packed respondent data shared by both likelihoods. The control count is
/// modelled over the real items; an appended always-zero item is ignored.
class LikelihoodData {
 public:
  LikelihoodData(const Dataset& ds, bool drop_impossible_confessors)
      : items_(ds.config.j_items), log_choose_(detail::log_choose_table(items_)) {
    rows_.reserve(ds.size() * kCovariateDim);
    for (const Respondent& r : ds.respondents) {
      if (r.y < 0 || r.y > ds.config.j_items + r.treat) {
        throw InputError("respondent " + std::to_string(r.id) + " has count " +
                         std::to_string(r.y) + " outside [0, j_items + treat]");
      }
      if (drop_impossible_confessors && r.treat == 1 && r.d == 1 && r.y == 0) continue;
      rows_.insert(rows_.end(), {1.0, static_cast<double>(r.x1), r.x2, r.x3});
      treat_.push_back(r.treat);
      y_.push_back(r.y);
      d_.push_back(r.d);
    }
  }

  std::size_t size() const { return y_.size(); }
  int items() const { return items_; }
  std::span<const double> log_choose() const { return log_choose_; }
  std::span<const double> row(std::size_t i) const {
    return {rows_.data() + i * kCovariateDim, kCovariateDim};
  }
  int treat(std::size_t i) const { return treat_[i]; }
  int y(std::size_t i) const { return y_[i]; }
  int d(std::size_t i) const { return d_[i]; }

 private:
  int items_;
  std::vector<double> log_choose_;
  std::vector<double> rows_;
  std::vector<int> treat_;
  std::vector<int> y_;
  std::vector<int> d_;
};

inline double linear(std::span<const double> coef, std::span<const double> row) {
  double s = 0.0;
  for (std::size_t k = 0; k < coef.size(); ++k) s += coef[k] * row[k];
  return s;
}

/// Parameters: (delta[4], gamma[4]).
class StandardLikelihood {
 public:
  explicit StandardLikelihood(const Dataset& ds) : data_(ds, false) {}

  std::size_t dim() const { return 2 * kCovariateDim; }
  std::size_t n_used() const { return data_.size(); }

  double operator()(std::span<const double> theta, std::span<double> grad) const {
    const auto delta = theta.subspan(0, kCovariateDim);
    const auto gamma = theta.subspan(kCovariateDim, kCovariateDim);
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto row = data_.row(i);
      const Contribution c =
          standard_contribution(data_.treat(i), data_.y(i), data_.items(), data_.log_choose(),
                                linear(delta, row), linear(gamma, row));
      total += c.value;
      for (std::size_t k = 0; k < kCovariateDim; ++k) {
        grad[k] += c.d_trait * row[k];
        grad[kCovariateDim + k] += c.d_control * row[k];
      }
    }
    return total;
  }

  Objective objective() const { return make_objective(*this); }

  template <typename L>
  static Objective make_objective(const L& lik) {
    Objective obj;
    obj.dim = lik.dim();
    obj.value_and_gradient = [&lik](std::span<const double> x, std::span<double> g) {
      return lik(x, g);
    };
    obj.value_at = [&lik](std::span<const double> x) {
      Vector g(lik.dim());
      return lik(x, g);
    };
    obj.gradient_at = [&lik](std::span<const double> x) {
      Vector g(lik.dim());
      lik(x, g);
      return g;
    };
    return obj;
  }

 private:
  LikelihoodData data_;
};

/// Parameters: (delta[4], gamma[4], kappa[2 or 4]). Treated respondents who
/// confess directly yet report zero items are impossible under the model and
/// are excluded when `drop_impossible_confessors` is set.
class CombinedLikelihood {
 public:
  CombinedLikelihood(const Dataset& ds, MisreportCovariates misreport,
                     bool drop_impossible_confessors = true)
      : data_(ds, drop_impossible_confessors), misreport_(misreport) {}

  std::size_t dim() const { return 2 * kCovariateDim + misreport_dim(misreport_); }
  std::size_t n_used() const { return data_.size(); }
  MisreportCovariates misreport() const { return misreport_; }

  double operator()(std::span<const double> theta, std::span<double> grad) const {
    const auto delta = theta.subspan(0, kCovariateDim);
    const auto gamma = theta.subspan(kCovariateDim, kCovariateDim);
    const auto kappa = theta.subspan(2 * kCovariateDim);
    const bool full = misreport_ == MisreportCovariates::Full;
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto row = data_.row(i);
      const double eta_m = full ? linear(kappa, row) : kappa[0] + kappa[1] * row[3];
      const Contribution c = combined_contribution(data_.treat(i), data_.d(i), data_.y(i),
                                                   data_.items(), data_.log_choose(),
                                                   linear(delta, row), linear(gamma, row), eta_m);
      total += c.value;
      for (std::size_t k = 0; k < kCovariateDim; ++k) {
        grad[k] += c.d_trait * row[k];
        grad[kCovariateDim + k] += c.d_control * row[k];
      }
      if (full) {
        for (std::size_t k = 0; k < kCovariateDim; ++k) {
          grad[2 * kCovariateDim + k] += c.d_misreport * row[k];
        }
      } else {
        grad[2 * kCovariateDim] += c.d_misreport;
        grad[2 * kCovariateDim + 1] += c.d_misreport * row[3];
      }
    }
    return total;
  }

  Objective objective() const { return StandardLikelihood::make_objective(*this); }

 private:
  LikelihoodData data_;
  MisreportCovariates misreport_;
};

}  // namespace listpolar
