#include "lsecbf/distance.hpp"

#include <cmath>
#include <limits>

#include "lsecbf/errors.hpp"
#include "newton.hpp"

namespace lsecbf {
namespace {

constexpr double kCenteringTol = 1e-12;
constexpr double kArmijo = 1e-4;

struct Iterate {
  Eigen::VectorXd z_ego;
  Eigen::VectorXd z_obs;
};

double barrier_objective(const DistanceProblem& p, const Eigen::VectorXd& ze,
                         const Eigen::VectorXd& zo, double t) {
  const double ce = membership_margin(p.ego, ze, p.ego_params);
  const double co = membership_margin(p.obstacle, zo, p.obstacle_params);
  if (!(ce < 0.0) || !(co < 0.0)) return std::numeric_limits<double>::infinity();
  return 0.5 * (ze - zo).squaredNorm() - (std::log(-ce) + std::log(-co)) / t;
}

bool jointly_feasible(const DistanceProblem& p, const Iterate& it) {
  return membership_margin(p.obstacle, it.z_ego, p.obstacle_params) < 0.0 ||
         membership_margin(p.ego, it.z_obs, p.ego_params) < 0.0;
}

DistanceSolution intersecting(const DistanceProblem& p, const Iterate& it, int iterations) {
  DistanceSolution s;
  const bool ego_inside = membership_margin(p.obstacle, it.z_ego, p.obstacle_params) < 0.0;
  const Eigen::VectorXd common = ego_inside ? it.z_ego : it.z_obs;
  s.z_ego = common;
  s.z_obstacle = common;
  s.value = 0.0;
  s.constraint_residuals << membership_margin(p.ego, common, p.ego_params),
      membership_margin(p.obstacle, common, p.obstacle_params);
  s.iterations = iterations;
  s.status = SolveStatus::Intersecting;
  return s;
}

// KKT map G(z, mu) of the equality form (both constraints active) and its Jacobian.
struct KktEval {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double stationarity = 0.0;
  double complementarity = 0.0;
  Eigen::Vector2d c;
};

KktEval kkt_eval(const DistanceProblem& p, const Eigen::VectorXd& ze, const Eigen::VectorXd& zo,
                 const Eigen::Vector2d& mu) {
  const Eigen::Index n = ze.size();
  const SmoothedConstraint ce = smoothed_constraint(p.ego, ze, p.ego_params);
  const SmoothedConstraint co = smoothed_constraint(p.obstacle, zo, p.obstacle_params);
  KktEval out;
  out.c << ce.value, co.value;
  out.residual.resize(2 * n + 2);
  const Eigen::VectorXd diff = ze - zo;
  out.residual.head(n) = diff + mu[0] * ce.gradient;
  out.residual.segment(n, n) = -diff + mu[1] * co.gradient;
  out.residual[2 * n] = ce.value;
  out.residual[2 * n + 1] = co.value;
  out.stationarity = out.residual.head(2 * n).cwiseAbs().maxCoeff();
  out.complementarity = std::max(std::abs(mu[0] * ce.value), std::abs(mu[1] * co.value));

  Eigen::MatrixXd& j = out.jacobian;
  j.setZero(2 * n + 2, 2 * n + 2);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  j.block(0, 0, n, n) = eye + mu[0] * ce.hessian;
  j.block(0, n, n, n) = -eye;
  j.block(n, 0, n, n) = -eye;
  j.block(n, n, n, n) = eye + mu[1] * co.hessian;
  j.block(0, 2 * n, n, 1) = ce.gradient;
  j.block(n, 2 * n + 1, n, 1) = co.gradient;
  j.block(2 * n, 0, 1, n) = ce.gradient.transpose();
  j.block(2 * n + 1, n, 1, n) = co.gradient.transpose();
  return out;
}

// Newton on the KKT equations. Returns the number of steps taken.
int polish(const DistanceProblem& p, Eigen::VectorXd& ze, Eigen::VectorXd& zo, Eigen::Vector2d& mu,
           int max_steps) {
  const Eigen::Index n = ze.size();
  int steps = 0;
  KktEval cur = kkt_eval(p, ze, zo, mu);
  for (; steps < max_steps; ++steps) {
    const double norm = cur.residual.cwiseAbs().maxCoeff();
    if (norm <= 1e-14) break;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(cur.jacobian);
    const Eigen::VectorXd delta = cod.solve(-cur.residual);
    if (!delta.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      const Eigen::VectorXd ze_t = ze + alpha * delta.head(n);
      const Eigen::VectorXd zo_t = zo + alpha * delta.segment(n, n);
      const Eigen::Vector2d mu_t = mu + alpha * delta.tail(2);
      KktEval trial = kkt_eval(p, ze_t, zo_t, mu_t);
      if (trial.residual.allFinite() && trial.residual.cwiseAbs().maxCoeff() < norm) {
        ze = ze_t;
        zo = zo_t;
        mu = mu_t;
        cur = std::move(trial);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return steps;
}

DistanceSolution finalize(const DistanceProblem& p, const SolverOptions& o, Eigen::VectorXd ze,
                          Eigen::VectorXd zo, const Eigen::Vector2d& mu, int iterations) {
  DistanceSolution s;
  const KktEval k = kkt_eval(p, ze, zo, mu);
  s.z_ego = std::move(ze);
  s.z_obstacle = std::move(zo);
  s.mu = mu;
  s.value = 0.5 * (s.z_ego - s.z_obstacle).squaredNorm();
  s.kkt_residual = std::max(k.stationarity, k.complementarity);
  s.constraint_residuals = k.c;
  s.iterations = iterations;
  const bool finite = s.z_ego.allFinite() && s.z_obstacle.allFinite() && mu.allFinite() &&
                      std::isfinite(s.kkt_residual);
  const bool certified = finite && s.kkt_residual <= o.kkt_tol &&
                         k.c.cwiseAbs().maxCoeff() <= o.activity_tol && mu.minCoeff() >= o.mu_min;
  s.status = certified ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  return s;
}

Eigen::VectorXd checked_start(const SetSpec& set, const ParamVector& params,
                              const std::optional<Eigen::VectorXd>& start, const char* which) {
  if (!start) return smoothed_center(set, params);
  if (start->size() != set.ambient_dim() || !start->allFinite()) {
    throw InvalidInput(std::string(which) + " start point has the wrong size or is not finite");
  }
  if (!(membership_margin(set, *start, params) < 0.0)) {
    throw InvalidInput(std::string(which) + " start point is not strictly feasible");
  }
  return *start;
}

}  // namespace

void DistanceProblem::validate() const {
  if (ego.ambient_dim() != obstacle.ambient_dim()) {
    throw InvalidInput("ego and obstacle sets live in different dimensions");
  }
  if (ego_params.size() != ego.param_dim()) throw InvalidInput("ego parameter length mismatch");
  if (obstacle_params.size() != obstacle.param_dim()) {
    throw InvalidInput("obstacle parameter length mismatch");
  }
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Intersecting:
      return "Intersecting";
    case SolveStatus::MaxIterations:
      return "MaxIterations";
    case SolveStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

DistanceSolution DistanceSolver::solve(const DistanceProblem& problem) {
  return solve(problem, options_);
}

DistanceSolution DistanceSolver::solve(const DistanceProblem& p, const SolverOptions& o) {
  p.validate();
  const Eigen::Index n = p.ego.ambient_dim();
  int iterations = 0;

  if (o.warm_start) {
    const WarmStart& w = *o.warm_start;
    if (w.z_ego.size() == n && w.z_obstacle.size() == n && w.z_ego.allFinite() &&
        w.z_obstacle.allFinite() && w.mu.allFinite() && w.mu.minCoeff() > 0.0) {
      Eigen::VectorXd ze = w.z_ego;
      Eigen::VectorXd zo = w.z_obstacle;
      Eigen::Vector2d mu = w.mu;
      iterations = polish(p, ze, zo, mu, o.max_polish);
      DistanceSolution s = finalize(p, o, std::move(ze), std::move(zo), mu, iterations);
      if (s.status == SolveStatus::Optimal && s.value > 0.0) return s;
    }
  }

  Iterate it{checked_start(p.ego, p.ego_params, o.ego_start, "ego"),
             checked_start(p.obstacle, p.obstacle_params, o.obstacle_start, "obstacle")};
  if (jointly_feasible(p, it)) return intersecting(p, it, iterations);

  hess_.resize(2 * n, 2 * n);
  grad_.resize(2 * n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  double t = o.t_initial;
  for (;;) {
    // Centering: Newton on f0 - (1/t) sum log(-c_k).
    for (;;) {
      const SmoothedConstraint ce = smoothed_constraint(p.ego, it.z_ego, p.ego_params);
      const SmoothedConstraint co = smoothed_constraint(p.obstacle, it.z_obs, p.obstacle_params);
      const Eigen::VectorXd diff = it.z_ego - it.z_obs;
      const double se = -ce.value;
      const double so = -co.value;
      grad_.head(n) = diff + ce.gradient / (t * se);
      grad_.tail(n) = -diff + co.gradient / (t * so);
      hess_.topLeftCorner(n, n) =
          eye + (ce.hessian / se + ce.gradient * ce.gradient.transpose() / (se * se)) / t;
      hess_.bottomRightCorner(n, n) =
          eye + (co.hessian / so + co.gradient * co.gradient.transpose() / (so * so)) / t;
      hess_.topRightCorner(n, n) = -eye;
      hess_.bottomLeftCorner(n, n) = -eye;

      const Eigen::VectorXd step = detail::regularized_newton_step(hess_, grad_);
      const double slope = grad_.dot(step);
      if (!std::isfinite(slope)) {
        DistanceSolution s = finalize(p, o, it.z_ego, it.z_obs, Eigen::Vector2d::Zero(), iterations);
        s.status = SolveStatus::NumericalFailure;
        return s;
      }
      if (-slope * 0.5 <= kCenteringTol) break;
      if (iterations >= o.max_iter) {
        DistanceSolution s = finalize(p, o, it.z_ego, it.z_obs, Eigen::Vector2d::Zero(), iterations);
        s.status = SolveStatus::MaxIterations;
        return s;
      }
      ++iterations;

      const double f = 0.5 * diff.squaredNorm() - (std::log(se) + std::log(so)) / t;
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd ze = it.z_ego + alpha * step.head(n);
        const Eigen::VectorXd zo = it.z_obs + alpha * step.tail(n);
        const double ft = barrier_objective(p, ze, zo, t);
        if (ft <= f + kArmijo * alpha * slope) {
          it.z_ego = ze;
          it.z_obs = zo;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // The decrement is above tolerance but no step decreases the barrier
        // in floating point; centered as far as working precision allows.
        if (-slope < 1e-9) break;
        DistanceSolution s = finalize(p, o, it.z_ego, it.z_obs, Eigen::Vector2d::Zero(), iterations);
        s.status = SolveStatus::NumericalFailure;
        return s;
      }
      if (jointly_feasible(p, it)) return intersecting(p, it, iterations);
    }
    if (2.0 / t <= o.gap_tol) break;
    t *= o.t_factor;
  }

  Eigen::Vector2d mu;
  mu[0] = 1.0 / (t * -membership_margin(p.ego, it.z_ego, p.ego_params));
  mu[1] = 1.0 / (t * -membership_margin(p.obstacle, it.z_obs, p.obstacle_params));
  const int budget = std::max(0, std::min(o.max_polish, o.max_iter - iterations));
  iterations += polish(p, it.z_ego, it.z_obs, mu, std::max(budget, 1));
  return finalize(p, o, std::move(it.z_ego), std::move(it.z_obs), mu, iterations);
}

DistanceSolution solve_distance(const DistanceProblem& problem, const SolverOptions& options) {
  DistanceSolver solver(options);
  return solver.solve(problem);
}

}  // namespace lsecbf
