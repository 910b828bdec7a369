#pragma once

// Unconstrained BFGS with a strong-Wolfe line search (bracketing + zoom).

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace spinring {

struct BfgsOptions {
  int max_iterations = 400;
  double gradient_tolerance = 1e-6;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_steps = 40;
  bool keep_history = false;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  int hessian_resets = 0;
  std::vector<double> history;  // objective after each accepted step
};

namespace detail {

// phi(alpha) = f(x + alpha p) with its directional derivative.
struct LinePoint {
  double alpha;
  double value;
  double slope;
};

inline double cubic_minimizer(const LinePoint& a, const LinePoint& b) {
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  return b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
}

}  // namespace detail

/// Minimises `f`, a callable `double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)`.
/// The inverse Hessian approximation is reset to the identity whenever the
/// curvature condition y's > 0 fails or the line search cannot make progress.
template <typename Objective>
BfgsResult minimize_bfgs(Objective&& f, Eigen::VectorXd x0, const BfgsOptions& opt = {}) {
  using detail::LinePoint;
  const Eigen::Index dim = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  res.gradient.resize(dim);
  res.value = f(res.x, res.gradient);

  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd trial_grad(dim);
  bool fresh_hessian = true;

  while (true) {
    if (!std::isfinite(res.value) || !res.gradient.allFinite()) break;
    if (res.gradient.norm() < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opt.max_iterations) break;

    Eigen::VectorXd dir = -inv_h * res.gradient;
    double slope0 = res.gradient.dot(dir);
    if (!(slope0 < 0.0)) {
      inv_h.setIdentity();
      ++res.hessian_resets;
      fresh_hessian = true;
      dir = -res.gradient;
      slope0 = -res.gradient.squaredNorm();
    }

    const LinePoint origin{0.0, res.value, slope0};
    auto evaluate = [&](double alpha) {
      const Eigen::VectorXd x = res.x + alpha * dir;
      const double v = f(x, trial_grad);
      return LinePoint{alpha, v, trial_grad.dot(dir)};
    };
    auto armijo_ok = [&](const LinePoint& p) {
      return std::isfinite(p.value) && p.value <= origin.value + opt.c1 * p.alpha * origin.slope;
    };
    auto curvature_ok = [&](const LinePoint& p) {
      return std::abs(p.slope) <= -opt.c2 * origin.slope;
    };

    // Scale the very first step so it has unit length in parameter space.
    double alpha = fresh_hessian ? std::min(1.0, 1.0 / dir.norm()) : 1.0;
    LinePoint prev = origin;
    LinePoint accepted{};
    Eigen::VectorXd accepted_grad;
    bool found = false;

    auto zoom = [&](LinePoint lo, LinePoint hi) {
      for (int k = 0; k < opt.max_line_search_steps; ++k) {
        double a = detail::cubic_minimizer(lo, hi);
        const double left = std::min(lo.alpha, hi.alpha);
        const double right = std::max(lo.alpha, hi.alpha);
        const double margin = 0.1 * (right - left);
        if (!std::isfinite(a) || a < left + margin || a > right - margin) a = 0.5 * (lo.alpha + hi.alpha);
        const LinePoint p = evaluate(a);
        if (!armijo_ok(p) || p.value >= lo.value) {
          hi = p;
        } else {
          if (curvature_ok(p)) {
            accepted = p;
            accepted_grad = trial_grad;
            return true;
          }
          if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = p;
        }
        if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
      }
      // Fall back to the best Armijo point seen if it strictly decreases.
      if (lo.alpha > 0.0 && lo.value < origin.value) {
        accepted = evaluate(lo.alpha);
        accepted_grad = trial_grad;
        return true;
      }
      return false;
    };

    for (int k = 0; k < opt.max_line_search_steps; ++k) {
      const LinePoint p = evaluate(alpha);
      if (!armijo_ok(p) || (k > 0 && p.value >= prev.value)) {
        found = zoom(prev, p);
        break;
      }
      if (curvature_ok(p)) {
        accepted = p;
        accepted_grad = trial_grad;
        found = true;
        break;
      }
      if (p.slope >= 0.0) {
        found = zoom(p, prev);
        break;
      }
      prev = p;
      alpha *= 2.0;
    }

    if (!found || !(accepted.value <= res.value)) {
      if (fresh_hessian) break;  // steepest descent cannot progress either
      inv_h.setIdentity();
      ++res.hessian_resets;
      fresh_hessian = true;
      continue;
    }

    const Eigen::VectorXd s = accepted.alpha * dir;
    const Eigen::VectorXd y = accepted_grad - res.gradient;
    res.x += s;
    res.value = accepted.value;
    res.gradient = accepted_grad;
    ++res.iterations;
    if (opt.keep_history) res.history.push_back(res.value);

    const double ys = y.dot(s);
    if (ys > 1e-14 * s.norm() * y.norm() && ys > 0.0) {
      if (fresh_hessian) inv_h *= ys / y.squaredNorm();
      const double rho = 1.0 / ys;
      const Eigen::VectorXd hy = inv_h * y;
      inv_h += ((ys + y.dot(hy)) * rho * rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
      fresh_hessian = false;
    } else {
      inv_h.setIdentity();
      ++res.hessian_resets;
      fresh_hessian = true;
    }
  }
  return res;
}

}  // namespace spinring
