#pragma once

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

#include "lsecbf/distance.hpp"
#include "lsecbf/sensitivity.hpp"

namespace lsecbf {

/// Extended class-K function alpha(h): gamma*h or gamma*h^3.
struct ClassKFunction {
  enum class Kind { Linear, Cubic };
  Kind kind = Kind::Linear;
  double gamma = 1.0;

  static ClassKFunction linear(double gamma) { return {Kind::Linear, gamma}; }
  static ClassKFunction cubic(double gamma) { return {Kind::Cubic, gamma}; }

  double operator()(double h) const;
  void validate() const;
};

std::string_view to_string(ClassKFunction::Kind kind);

struct BarrierConfig {
  /// Margin in squared-length units, subtracted from d = 1/2 |z_E - z_j|^2.
  double R = 0.0;
  ClassKFunction alpha{};

  /// R = r^2 / 2, i.e. the smoothed sets keep Euclidean distance r.
  static BarrierConfig from_margin_distance(double r, ClassKFunction alpha = {});
  void validate() const;
};

/// h = d - R; -R when the sets intersect. Throws InvalidInput for other statuses.
double barrier_value(const DistanceSolution& solution, const BarrierConfig& config);

/// Row coeff . u + offset >= 0.
struct SafetyConstraintRow {
  Eigen::VectorXd coeff;
  double offset = 0.0;
  int obstacle_id = -1;
  double h_value = 0.0;
};

/// Per-obstacle inputs of one row.
struct ObstacleTerm {
  int obstacle_id = -1;
  double h = 0.0;
  Eigen::VectorXd dh_dlambda_ego;
  Eigen::VectorXd dh_dlambda_obstacle;
  /// Estimated rate of the obstacle parameters.
  Eigen::VectorXd obstacle_rate;
};

/// dh/dlambda_E (f + g u) + dh/dlambda_j lambda_j' + alpha(h) >= 0, one row per term.
std::vector<SafetyConstraintRow> assemble_rows(std::span<const ObstacleTerm> terms,
                                               const Eigen::Ref<const Eigen::VectorXd>& f,
                                               const Eigen::Ref<const Eigen::MatrixXd>& g,
                                               const BarrierConfig& config);

enum class FilterStatus { Optimal, Infeasible };

std::string_view to_string(FilterStatus status);

struct FilteredInput {
  Eigen::VectorXd u;
  FilterStatus status = FilterStatus::Infeasible;
  /// Obstacle ids of rows in the final active set, in activation order.
  std::vector<int> active_rows;
  /// Multipliers of active_rows.
  std::vector<double> multipliers;
};

/// min |u - u_nom|^2 s.t. rows, by the Goldfarb-Idnani dual active-set method
/// (identity Hessian). Infeasible is returned with u left at the last iterate
/// when a violated row cannot be added.
FilteredInput solve_filter_qp(const Eigen::Ref<const Eigen::VectorXd>& u_nom,
                              std::span<const SafetyConstraintRow> rows);

}  // namespace lsecbf
