#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>

#include "lsecbf/set_model.hpp"

namespace lsecbf {

/// Minimum distance between the smoothed ego set and one smoothed obstacle.
struct DistanceProblem {
  SetSpec ego;
  SetSpec obstacle;
  ParamVector ego_params;
  ParamVector obstacle_params;

  /// Throws InvalidInput when ambient dimensions or parameter lengths disagree.
  void validate() const;
};

enum class SolveStatus { Optimal, Intersecting, MaxIterations, NumericalFailure };

std::string_view to_string(SolveStatus status);

struct DistanceSolution {
  Eigen::VectorXd z_ego;
  Eigen::VectorXd z_obstacle;
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  /// Half the squared distance between z_ego and z_obstacle.
  double value = 0.0;
  double kkt_residual = 0.0;
  Eigen::Vector2d constraint_residuals = Eigen::Vector2d::Zero();
  int iterations = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
};

/// Primal point and multipliers from an earlier solve.
struct WarmStart {
  Eigen::VectorXd z_ego;
  Eigen::VectorXd z_obstacle;
  Eigen::Vector2d mu;
};

struct SolverOptions {
  /// Budget of barrier Newton steps plus KKT polish steps.
  int max_iter = 100;
  double kkt_tol = 1e-8;
  double activity_tol = 1e-6;
  double mu_min = 1e-10;
  /// Barrier continuation stops once 2/t is at most this.
  double gap_tol = 1e-10;
  double t_initial = 1.0;
  double t_factor = 10.0;
  int max_polish = 5;
  /// Strictly feasible starting points; phase-I centers are used when absent.
  std::optional<Eigen::VectorXd> ego_start;
  std::optional<Eigen::VectorXd> obstacle_start;
  /// Previous solution. Tried with KKT Newton alone first; falls back to a
  /// cold barrier solve if that does not certify optimality.
  std::optional<WarmStart> warm_start;
};

/// Solver for the smoothed distance program
///   min 1/2 |z_E - z_j|^2  s.t.  c_E(z_E) <= 0,  c_j(z_j) <= 0,
/// with c = LSE_eps^+(F) - log(n_F)/eps, by a primal log-barrier Newton method
/// with continuation followed by Newton polish on the KKT system.
///
/// An instance keeps scratch storage; use one per thread.
class DistanceSolver {
 public:
  explicit DistanceSolver(SolverOptions options = {}) : options_(std::move(options)) {}

  DistanceSolution solve(const DistanceProblem& problem);
  DistanceSolution solve(const DistanceProblem& problem, const SolverOptions& options);

  const SolverOptions& options() const { return options_; }

 private:
  SolverOptions options_;
  Eigen::MatrixXd hess_;
  Eigen::VectorXd grad_;
};

DistanceSolution solve_distance(const DistanceProblem& problem, const SolverOptions& options = {});

}  // namespace lsecbf
