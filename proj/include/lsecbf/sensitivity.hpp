#pragma once

#include <Eigen/Dense>

#include "lsecbf/distance.hpp"

namespace lsecbf {

/// Implicit-function system of the distance program at an optimal point.
/// With nu = (z_E, z_j, mu) and theta = (lambda_E, lambda_j), the Jacobian
/// dG/dnu is [[A, B^T], [diag(mu) B, D]].
struct KktSystem {
  Eigen::MatrixXd A;        ///< 2N x 2N Hessian of the Lagrangian in z
  Eigen::MatrixXd B;        ///< 2 x 2N stacked constraint gradients
  Eigen::Vector2d mu;       ///< C = diag(mu)
  Eigen::Vector2d constraint_values;  ///< D = diag(constraint_values)
  Eigen::MatrixXd G_theta;  ///< (2N+2) x (M_E+M_j)
  Eigen::VectorXd z_ego;
  Eigen::VectorXd z_obstacle;
  Eigen::Index ego_param_dim = 0;
  Eigen::Index obstacle_param_dim = 0;

  Eigen::Index ambient_dim() const { return z_ego.size(); }
  /// dG/dnu with D replaced by zeros.
  Eigen::MatrixXd jacobian() const;
};

struct DistanceGradient {
  Eigen::VectorXd d_dlambda_ego;
  Eigen::VectorXd d_dlambda_obstacle;
  /// 1-norm condition estimate of the factorized dG/dnu.
  double condition_estimate = 0.0;
};

struct SensitivityResult {
  Eigen::MatrixXd dnu_dtheta;  ///< (2N+2) x (M_E+M_j)
  DistanceGradient gradient;
};

/// Assembles A, B, C, D and dG/dtheta by the chain rule through the
/// constraint stacks. Throws InvalidInput unless the solution is Optimal.
KktSystem assemble_kkt_system(const DistanceProblem& problem, const DistanceSolution& solution);

/// Solves dnu/dtheta = -(dG/dnu)^{-1} dG/dtheta with partial-pivoting LU and
/// maps it to the gradient of d = 1/2 |z_E - z_j|^2. Throws SingularJacobian
/// when the condition estimate reaches 1e12.
SensitivityResult solve_sensitivity(const KktSystem& system);

/// assemble_kkt_system followed by solve_sensitivity.
DistanceGradient distance_gradient(const DistanceProblem& problem, const DistanceSolution& solution);

/// Gradient of the optimal value through the Lagrangian, mu^T dc/dtheta
/// (the column sums of the complementarity rows of G_theta). Does not factor
/// the Jacobian, so it stays usable when dG/dnu is singular to working
/// precision (parallel facets under tight smoothing). condition_estimate is 0.
DistanceGradient envelope_gradient(const KktSystem& system);

inline constexpr double kMaxConditionEstimate = 1e12;

}  // namespace lsecbf
