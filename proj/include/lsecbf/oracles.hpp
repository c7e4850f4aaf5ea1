#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>

#include "lsecbf/cbf.hpp"

// Brute-force references for tests and grad-check. Nothing in the production
// library calls into this.
namespace lsecbf::oracles {

/// Euclidean distance between two exact 2D polytopes A_i R(theta_i)^T (x - c_i) <= b_i,
/// with poses (c_1, c_2, theta). Alternating projections, each projection by
/// active-set enumeration. Zero when they overlap. Throws InvalidInput for
/// unbounded input or more than 12 facets.
double exact_polytope_distance(const Eigen::MatrixXd& a1, const Eigen::VectorXd& b1, const Eigen::Vector3d& pose1,
                               const Eigen::MatrixXd& a2, const Eigen::VectorXd& b2, const Eigen::Vector3d& pose2);

/// Euclidean projection of p onto {x : A x <= b} by enumerating active sets
/// of up to N facets. Throws InvalidInput if no candidate is feasible.
Eigen::VectorXd project_onto_polytope(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      const Eigen::VectorXd& p);

/// True when {d : A d <= 0} is only the origin.
bool polytope_is_bounded(const Eigen::MatrixXd& a);

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h.
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                                           const Eigen::VectorXd& theta, double step = 1e-5);

/// min |u - u_nom|^2 over rows by trying all 2^J active subsets. J <= 12.
FilteredInput exhaustive_qp(const Eigen::VectorXd& u_nom, std::span<const SafetyConstraintRow> rows);

struct OracleReport {
  Eigen::VectorXd reference;
  Eigen::VectorXd production;
  double abs_error = 0.0;  ///< max over components
  double rel_error = 0.0;  ///< max over components of |diff| / |reference|, floored components excluded
  double rel_tol = 0.0;
  double abs_floor = 0.0;
  bool pass = false;

  std::string summary() const;
};

/// Component-wise check |p - r| <= max(rel_tol * |r|, abs_floor).
OracleReport compare(const Eigen::VectorXd& reference, const Eigen::VectorXd& production, double rel_tol,
                     double abs_floor);

}  // namespace lsecbf::oracles
