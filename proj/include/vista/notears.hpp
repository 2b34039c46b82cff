#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "vista/graph.hpp"
#include "vista/synth.hpp"

namespace vista {

class LearnerDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NotearsOptions {
  double tau = 0.1;     // l1 penalty
  double omega = 0.3;   // hard threshold on |W_ij|
  double rho_init = 1.0;
  double alpha_init = 0.0;
  int max_outer = 20;
  double h_tol = 1e-8;
  double grad_tol = 1e-6;  // inner tolerance on the prox-gradient norm
  int max_inner = 5000;
  double rho_max = 1e16;
};

namespace detail {

/// Acyclicity measure h(W) = trace(exp(W o W)) - k and its gradient
/// exp(W o W)^T o 2W.
inline std::pair<double, Eigen::MatrixXd> notears_h(const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd e = Eigen::MatrixXd(w.cwiseProduct(w)).exp();
  const double h = e.trace() - static_cast<double>(w.rows());
  const Eigen::MatrixXd grad = e.transpose().cwiseProduct(2.0 * w);
  return {h, grad};
}

inline Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& w, double t) {
  return w.unaryExpr([t](double x) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
  });
}

}  // namespace detail

/// Augmented-Lagrangian NOTEARS solve on standardized data: minimize
/// (1/2N)||X - XW||_F^2 + tau*||W||_1 subject to h(W) = 0. Inner solver is
/// proximal gradient descent with backtracking; the diagonal is zeroed at
/// every step. Returns the optimized weight matrix (pre-threshold).
inline Eigen::MatrixXd notears_lite_weights(const DataMatrix& x,
                                            const NotearsOptions& opt = {}) {
  const int k = static_cast<int>(x.cols());
  const double n_samples = static_cast<double>(x.rows());
  if (k == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::MatrixXd cov = (x.transpose() * x) / n_samples;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, k);
  double rho = opt.rho_init;
  double alpha = opt.alpha_init;
  double h_prev = std::numeric_limits<double>::infinity();

  // Smooth part of the objective and its gradient at fixed (rho, alpha).
  auto smooth = [&](const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd resid = m - Eigen::MatrixXd::Identity(k, k);
    const double f = 0.5 * (cov.cwiseProduct(resid * resid.transpose())).sum();
    const auto [h, h_grad] = detail::notears_h(m);
    const double value = f + alpha * h + 0.5 * rho * h * h;
    const Eigen::MatrixXd grad = cov * resid + (alpha + rho * h) * h_grad;
    return std::make_tuple(value, grad, h);
  };

  auto inner_solve = [&](Eigen::MatrixXd start) {
    Eigen::MatrixXd cur = std::move(start);
    cur.diagonal().setZero();
    double step = 1.0;
    auto [value, grad, h_cur] = smooth(cur);
    for (int it = 0; it < opt.max_inner; ++it) {
      if (!std::isfinite(value)) {
        throw LearnerDivergedError("notears_lite: non-finite objective");
      }
      Eigen::MatrixXd next;
      double next_value = 0.0;
      Eigen::MatrixXd next_grad;
      double next_h = 0.0;
      while (true) {
        next = detail::soft_threshold(cur - step * grad, step * opt.tau);
        next.diagonal().setZero();
        std::tie(next_value, next_grad, next_h) = smooth(next);
        const Eigen::MatrixXd diff = next - cur;
        const double quad =
            value + grad.cwiseProduct(diff).sum() + diff.squaredNorm() / (2.0 * step);
        if (next_value <= quad + 1e-12 || step < 1e-12) break;
        step *= 0.5;
      }
      const double move = (next - cur).norm() / step;
      cur = std::move(next);
      value = next_value;
      grad = std::move(next_grad);
      h_cur = next_h;
      if (move <= opt.grad_tol) break;
      step = std::min(step * 1.5, 1e4);
    }
    return cur;
  };

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    Eigen::MatrixXd w_new;
    double h_new = 0.0;
    while (true) {
      w_new = inner_solve(w);
      h_new = detail::notears_h(w_new).first;
      if (h_new > 0.25 * h_prev && rho < opt.rho_max) {
        rho *= 10.0;
      } else {
        break;
      }
    }
    w = std::move(w_new);
    h_prev = h_new;
    alpha += rho * h_new;
    if (h_new <= opt.h_tol) break;
  }
  if (!w.allFinite()) throw LearnerDivergedError("notears_lite: non-finite weights");
  return w;
}

/// Hard-threshold |W_ij| < omega, then drop smallest-|W| edges (ties by
/// ascending (u, v)) until the graph is acyclic.
inline Digraph notears_prune(const Eigen::MatrixXd& w, double omega) {
  const int k = static_cast<int>(w.rows());
  std::vector<std::tuple<double, int, int>> kept;
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      if (u != v && std::abs(w(u, v)) >= omega) {
        kept.emplace_back(std::abs(w(u, v)), u, v);
      }
    }
  }
  auto build = [&](std::size_t skip_below) {
    Digraph g(k);
    for (std::size_t i = skip_below; i < kept.size(); ++i) {
      g.add_edge(std::get<1>(kept[i]), std::get<2>(kept[i]));
    }
    return g;
  };
  std::sort(kept.begin(), kept.end());
  std::size_t dropped = 0;
  Digraph g = build(dropped);
  while (!is_acyclic(g)) {
    ++dropped;
    g = build(dropped);
  }
  return g;
}

inline Digraph notears_lite_learn(const DataMatrix& x, const NotearsOptions& opt = {}) {
  return notears_prune(notears_lite_weights(x, opt), opt.omega);
}

}  // namespace vista
