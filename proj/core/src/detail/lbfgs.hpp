#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

namespace nbody::detail {

// Objective callback: returns f(x) and fills *grad when non-null. A return
// of +infinity marks a forbidden point (collision guard); the line search
// backtracks away from it and never requests its gradient.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct LbfgsOptions {
  int max_iters = 500;
  double tol_grad = 1e-10;
  int history = 8;
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

// L-BFGS two-loop recursion with Armijo backtracking (step halving). Pure
// and deterministic: identical inputs give identical iterates.
inline LbfgsResult minimizeLbfgs(const ObjectiveFn& fg, Eigen::VectorXd x0,
                                 const LbfgsOptions& opts = {}) {
  LbfgsResult res;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
  double f = fg(x, &grad);
  if (!std::isfinite(f)) {  // start inside the forbidden region
    res.x = x;
    res.value = f;
    res.line_search_failed = true;
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    res.iterations = iter;
    res.x = x;
    res.value = f;
    res.grad_norm = grad.norm();
    if (res.grad_norm < opts.tol_grad) {
      res.converged = true;
      return res;
    }
    if (iter == opts.max_iters) break;

    // Two-loop recursion over the stored curvature pairs.
    Eigen::VectorXd dir = -grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] *
          s_hist[static_cast<std::size_t>(i)].dot(dir);
      dir -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) /
                           y_hist.back().squaredNorm();
      if (std::isfinite(gamma) && gamma > 0.0) dir *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }

    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {  // not a descent direction: fall back to steepest
      dir = -grad;
      slope = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Near the minimum the predicted decrease drops below the floating
    // resolution of f; the relaxed term keeps the search from stalling
    // there while the analytic gradient still carries information.
    const double f_slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
    double step = 1.0;
    Eigen::VectorXd x_new;
    Eigen::VectorXd grad_new(x.size());
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_new = x + step * dir;
      f_new = fg(x_new, nullptr);
      if (f_new <= f + opts.armijo_c * step * slope + f_slack) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.line_search_failed = true;
      return res;
    }
    f_new = fg(x_new, &grad_new);

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    grad = grad_new;
    f = f_new;
  }
  return res;
}

}  // namespace nbody::detail
