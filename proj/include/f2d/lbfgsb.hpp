#pragma once

#include <Eigen/Core>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

#include "f2d/errors.hpp"

namespace f2d {
namespace optim {

struct Options {
  int memory = 10;
  int max_iterations = 100;
  double grad_tolerance = 1e-6;   // projected-gradient infinity norm
  double f_rel_tolerance = 1e-9;  // relative per-iteration improvement
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 40;
};

struct IterationRecord {
  double f;
  double grad_norm;  // projected-gradient infinity norm
};

struct Result {
  Eigen::VectorXd x;
  double f = 0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;  // one record per evaluation point kept
};

/// f(x, grad_out) -> value; grad_out is always requested.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

namespace detail {

inline void clip_to_box(Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  x = x.cwiseMax(lo).cwiseMin(hi);
}

inline Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Eigen::VectorXd pg = g;
  for (int i = 0; i < x.size(); ++i) {
    if ((x[i] <= lo[i] && g[i] > 0) || (x[i] >= hi[i] && g[i] < 0)) pg[i] = 0;
  }
  return pg;
}

struct Correction {
  Eigen::VectorXd s, y;
  double rho;
};

/// Standard two-loop recursion with gamma scaling on the most recent pair.
inline Eigen::VectorXd two_loop_direction(const Eigen::VectorXd& g,
                                          const std::deque<Correction>& history) {
  Eigen::VectorXd q = -g;
  if (history.empty()) return q;
  std::vector<double> alpha(history.size());
  for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  const Correction& last = history.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return q;
}

}  // namespace detail

/// Limited-memory quasi-Newton descent with box bounds. Bounds are handled by
/// gradient projection: coordinates pinned at an active bound are frozen out
/// of the search direction and steps are capped at the box boundary. The line
/// search enforces strong Wolfe conditions (falling back to the best
/// sufficient-decrease point when curvature cannot be met, which happens near
/// nonsmooth kinks). Deterministic for identical inputs.
inline Result minimize_bounded(const Objective& fn, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                               const Options& opts = {}) {
  const auto n = x0.size();
  const double inf = std::numeric_limits<double>::infinity();

  Result res;
  res.x = x0;
  detail::clip_to_box(res.x, lower, upper);
  res.grad.resize(n);

  auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double f = fn(x, g);
    if (!std::isfinite(f) || !g.allFinite())
      throw NonFiniteObjective("objective or gradient evaluated non-finite");
    return f;
  };

  res.f = eval(res.x, res.grad);
  std::deque<detail::Correction> history;

  Eigen::VectorXd pg = detail::projected_gradient(res.x, res.grad, lower, upper);
  res.trace.push_back({res.f, pg.lpNorm<Eigen::Infinity>()});
  if (pg.lpNorm<Eigen::Infinity>() <= opts.grad_tolerance) {
    res.converged = true;
    return res;
  }

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    Eigen::VectorXd dir = detail::two_loop_direction(res.grad, history);
    // Freeze coordinates pinned at a bound whose gradient pushes outward.
    for (int i = 0; i < n; ++i) {
      if ((res.x[i] <= lower[i] && res.grad[i] > 0) || (res.x[i] >= upper[i] && res.grad[i] < 0))
        dir[i] = 0;
    }
    double slope = dir.dot(res.grad);
    if (!(slope < 0)) {  // not a descent direction; restart from steepest descent
      history.clear();
      dir = -pg;
      slope = dir.dot(res.grad);
      if (!(slope < 0)) break;  // projected gradient exhausted
    }

    // Largest feasible step along dir.
    double alpha_max = inf;
    for (int i = 0; i < n; ++i) {
      if (dir[i] > 0 && upper[i] < inf) alpha_max = std::min(alpha_max, (upper[i] - res.x[i]) / dir[i]);
      if (dir[i] < 0 && lower[i] > -inf) alpha_max = std::min(alpha_max, (lower[i] - res.x[i]) / dir[i]);
    }
    if (!(alpha_max > 0)) break;

    // Strong Wolfe line search (bracket + zoom), capped at alpha_max.
    const double f0 = res.f;
    Eigen::VectorXd g_trial(n);
    double best_alpha = 0, best_f = f0;
    Eigen::VectorXd best_g = res.grad;
    bool accepted = false;

    auto phi = [&](double alpha, double& dphi) {
      const Eigen::VectorXd xt = res.x + alpha * dir;
      const double ft = eval(xt, g_trial);
      dphi = g_trial.dot(dir);
      return ft;
    };
    auto armijo_ok = [&](double alpha, double f_alpha) {
      return f_alpha <= f0 + opts.wolfe_c1 * alpha * slope;
    };
    auto track_best = [&](double alpha, double f_alpha) {
      if (f_alpha < best_f && armijo_ok(alpha, f_alpha)) {
        best_alpha = alpha;
        best_f = f_alpha;
        best_g = g_trial;
      }
    };
    auto wolfe_ok = [&](double dphi) { return std::abs(dphi) <= -opts.wolfe_c2 * slope; };

    double a_lo = 0, f_lo = f0, dphi_lo = slope;
    double a_prev = 0, f_prev = f0;
    double a = std::min(1.0, alpha_max);
    int evals = 0;
    bool zooming = false;
    double a_hi = 0, f_hi = 0;

    while (evals < opts.max_line_search) {
      double dphi;
      const double fa = phi(a, dphi);
      ++evals;
      track_best(a, fa);

      if (!zooming) {
        if (!armijo_ok(a, fa) || (evals > 1 && fa >= f_prev)) {
          zooming = true;
          a_hi = a;
          f_hi = fa;
          a_lo = a_prev;
          f_lo = f_prev;
        } else if (wolfe_ok(dphi)) {
          best_alpha = a;
          best_f = fa;
          best_g = g_trial;
          accepted = true;
          break;
        } else if (dphi >= 0) {
          zooming = true;
          a_hi = a_prev;
          f_hi = f_prev;
          a_lo = a;
          f_lo = fa;
        } else if (a >= alpha_max) {
          // Slope still negative at the boundary: take the bound-hitting step.
          best_alpha = a;
          best_f = fa;
          best_g = g_trial;
          accepted = true;
          break;
        } else {
          a_prev = a;
          f_prev = fa;
          a = std::min(2.0 * a, alpha_max);
          continue;
        }
      } else {
        if (armijo_ok(a, fa) && fa < f_lo) {
          if (wolfe_ok(dphi)) {
            best_alpha = a;
            best_f = fa;
            best_g = g_trial;
            accepted = true;
            break;
          }
          if (dphi * (a_hi - a_lo) >= 0) {
            a_hi = a_lo;
            f_hi = f_lo;
          }
          a_lo = a;
          f_lo = fa;
        } else {
          a_hi = a;
          f_hi = fa;
        }
      }
      if (zooming) {
        if (std::abs(a_hi - a_lo) <= 1e-14 * std::max(1.0, std::abs(a_lo))) break;
        a = 0.5 * (a_lo + a_hi);
      }
    }
    (void)f_hi;
    (void)dphi_lo;

    if (best_alpha <= 0) break;  // no acceptable decrease found
    if (!accepted && best_f >= f0) break;

    const Eigen::VectorXd x_new = (res.x + best_alpha * dir).cwiseMax(lower).cwiseMin(upper);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = best_g - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      history.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    }

    const double f_old = res.f;
    res.x = x_new;
    res.f = best_f;
    res.grad = best_g;
    res.iterations = iter;

    pg = detail::projected_gradient(res.x, res.grad, lower, upper);
    res.trace.push_back({res.f, pg.lpNorm<Eigen::Infinity>()});

    if (pg.lpNorm<Eigen::Infinity>() <= opts.grad_tolerance) {
      res.converged = true;
      break;
    }
    if (opts.f_rel_tolerance > 0 &&
        f_old - res.f <= opts.f_rel_tolerance * std::max({1.0, std::abs(f_old), std::abs(res.f)})) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace optim
}  // namespace f2d
