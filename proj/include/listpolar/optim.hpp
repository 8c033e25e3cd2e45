#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "listpolar/errors.hpp"

namespace listpolar {

using Vector = std::vector<double>;

/// A smooth scalar function to be maximized. `value_and_gradient`, when set,
/// is preferred by the optimizer over separate calls.
struct Objective {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value_at;
  std::function<Vector(std::span<const double>)> gradient_at;
  std::function<double(std::span<const double>, std::span<double>)> value_and_gradient;

  double eval(std::span<const double> x, std::span<double> grad) const {
    if (value_and_gradient) return value_and_gradient(x, grad);
    const Vector g = gradient_at(x);
    std::copy(g.begin(), g.end(), grad.begin());
    return value_at(x);
  }
};

struct OptimResult {
  Vector argmax;
  double max_value = -std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  Vector trace;  // objective at the start and after each accepted step
};

inline constexpr double kGradientTolerance = 1e-6;

inline bool gradient_converged(double grad_norm, double value) {
  return grad_norm < kGradientTolerance * std::max(1.0, std::abs(value));
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Dense row-major square matrix, just enough for the inverse-Hessian update.
class SquareMatrix {
 public:
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  static SquareMatrix identity(std::size_t n, double scale = 1.0) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  Vector times(std::span<const double> v) const {
    Vector out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }

  // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
  void bfgs_update(std::span<const double> s, std::span<const double> y) {
    const double rho = 1.0 / dot(s, y);
    const Vector hy = times(y);
    const double yhy = dot(y, hy);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        (*this)(i, j) += -rho * (hy[i] * s[j] + s[i] * hy[j]) +
                         (rho * rho * yhy + rho) * s[i] * s[j];
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

}  // namespace detail

/// Quasi-Newton ascent: BFGS inverse-Hessian updates with a backtracking line
/// search enforcing sufficient increase. Returns the best point visited.
inline OptimResult maximize(const Objective& obj, std::span<const double> init,
                            std::size_t max_iter = 500) {
  if (init.size() != obj.dim) throw InputError("maximize: init has wrong dimension");
  const std::size_t n = obj.dim;
  constexpr double kArmijo = 1e-4;

  // Internally minimize phi = -f.
  Vector x(init.begin(), init.end());
  Vector grad(n);
  double f = obj.eval(x, grad);
  if (!std::isfinite(f)) throw InputError("maximize: objective is not finite at the initial point");
  for (double& g : grad) g = -g;

  OptimResult result;
  result.trace.push_back(f);
  auto finish = [&](std::size_t iters) {
    result.argmax = x;
    result.max_value = f;
    result.grad_norm = detail::norm(grad);
    result.iterations = iters;
    result.converged = gradient_converged(result.grad_norm, f);
    return result;
  };

  auto hess = detail::SquareMatrix::identity(n);
  bool fresh_hessian = true;
  Vector x_new(n);
  Vector grad_new(n);
  Vector s(n);
  Vector yv(n);

  for (std::size_t it = 0; it < max_iter; ++it) {
    const double gnorm = detail::norm(grad);
    if (gradient_converged(gnorm, f)) return finish(it);

    Vector dir = hess.times(grad);
    for (double& v : dir) v = -v;
    double slope = detail::dot(grad, dir);
    if (!(slope < 0.0)) {
      hess = detail::SquareMatrix::identity(n);
      fresh_hessian = true;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
      slope = -gnorm * gnorm;
    }

    double step = fresh_hessian ? std::min(1.0, 1.0 / detail::norm(dir)) : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = obj.eval(x_new, grad_new);
      if (std::isfinite(f_new) && -f_new <= -f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh_hessian) {
        // Retry the iteration from steepest ascent before giving up.
        hess = detail::SquareMatrix::identity(n);
        fresh_hessian = true;
        continue;
      }
      return finish(it);
    }

    for (std::size_t i = 0; i < n; ++i) {
      grad_new[i] = -grad_new[i];
      s[i] = x_new[i] - x[i];
      yv[i] = grad_new[i] - grad[i];
    }
    const double sy = detail::dot(s, yv);
    if (sy > 1e-12 * detail::norm(s) * detail::norm(yv)) {
      if (fresh_hessian) hess = detail::SquareMatrix::identity(n, sy / detail::dot(yv, yv));
      hess.bfgs_update(s, yv);
      fresh_hessian = false;
    }
    x.swap(x_new);
    grad.swap(grad_new);
    f = f_new;
    result.trace.push_back(f);
  }
  return finish(max_iter);
}

struct MultiStartOptions {
  std::size_t starts = 5;
  double perturbation_scale = 0.5;
  std::uint64_t seed = 0x6c697374706f6cULL;
  std::size_t max_iter = 500;
};

/// Runs `maximize` from the zero vector and from `starts - 1` Gaussian
/// perturbations of it; keeps the best converged fit, or the best fit
/// overall when none converged. Earlier starts win near-ties.
inline OptimResult maximize_multistart(const Objective& obj, const MultiStartOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, opts.perturbation_scale);
  OptimResult best;
  bool have = false;
  for (std::size_t k = 0; k < std::max<std::size_t>(1, opts.starts); ++k) {
    Vector init(obj.dim, 0.0);
    if (k > 0) {
      for (double& v : init) v = normal(rng);
    }
    OptimResult r;
    try {
      r = maximize(obj, init, opts.max_iter);
    } catch (const InputError&) {
      continue;
    }
    const double margin = 1e-8 * std::max(1.0, std::abs(best.max_value));
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.max_value > best.max_value + margin);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) throw InputError("maximize_multistart: objective not finite at any start");
  return best;
}

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|, |fd|).
inline double check_gradient(const Objective& obj, std::span<const double> point,
                             double step = 1e-5) {
  Vector grad(obj.dim);
  obj.eval(point, grad);
  Vector probe(point.begin(), point.end());
  Vector scratch(obj.dim);
  double worst = 0.0;
  for (std::size_t k = 0; k < obj.dim; ++k) {
    const double orig = probe[k];
    probe[k] = orig + step;
    const double up = obj.eval(probe, scratch);
    probe[k] = orig - step;
    const double down = obj.eval(probe, scratch);
    probe[k] = orig;
    const double fd = (up - down) / (2.0 * step);
    const double denom = std::max({1.0, std::abs(grad[k]), std::abs(fd)});
    worst = std::max(worst, std::abs(grad[k] - fd) / denom);
  }
  return worst;
}

inline double log_binomial_pmf(int y, int n, double p) {
  if (n < 0 || y < 0 || y > n) throw InputError("log_binomial_pmf: need 0 <= y <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("log_binomial_pmf: p must lie in [0, 1]");
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
  const double succ = y == 0 ? 0.0 : y * std::log(p);
  const double fail = y == n ? 0.0 : (n - y) * std::log1p(-p);
  return log_choose + succ + fail;
}

}  // namespace listpolar
