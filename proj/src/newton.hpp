#pragma once

// Internal helpers shared by the set model and the distance solver.

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "lsecbf/set_model.hpp"

namespace lsecbf::detail {

struct NewtonOutcome {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
};

/// Solves H d = -g for a symmetric H that should be positive definite,
/// shifting the diagonal until the LDLT factorization is usable.
inline Eigen::VectorXd regularized_newton_step(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  double shift = 0.0;
  const Eigen::Index n = h.rows();
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h + shift * Eigen::MatrixXd::Identity(n, n));
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        (ldlt.vectorD().array() > 0.0).all()) {
      Eigen::VectorXd d = ldlt.solve(-g);
      if (d.allFinite() && g.dot(d) < 0.0) return d;
    }
    shift = (shift == 0.0) ? 1e-14 * scale : shift * 10.0;
  }
  return -g;
}

/// Damped Newton with Armijo backtracking (constant 1e-4) for a smooth convex
/// objective. `derivatives(x, g, h)` returns f(x) and fills g, h.
template <typename Objective, typename Derivatives>
NewtonOutcome damped_newton(Objective&& objective, Derivatives&& derivatives, Eigen::VectorXd x,
                            int max_iterations, double decrement_tol = 1e-20) {
  NewtonOutcome out;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  for (int it = 0; it < max_iterations; ++it) {
    const double f = derivatives(x, g, h);
    const Eigen::VectorXd d = regularized_newton_step(h, g);
    const double slope = g.dot(d);
    ++out.iterations;
    if (-slope <= decrement_tol) {
      out.converged = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = x + alpha * d;
      const double ft = objective(trial);
      if (std::isfinite(ft) && ft <= f + 1e-4 * alpha * slope) {
        x = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No measurable decrease left; treat as converged at working precision.
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

NewtonOutcome minimize_smoothed_stack(const ConstraintStack& stack, const ParamVector& params,
                                      double smoothing, Eigen::VectorXd x, int max_iterations);

}  // namespace lsecbf::detail
