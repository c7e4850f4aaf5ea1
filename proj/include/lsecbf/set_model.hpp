#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsecbf/lse.hpp"

namespace lsecbf {

enum class ParamKind {
  RigidPose2d,  ///< (x_c1, x_c2, theta) in meters, meters, radians; theta is not wrapped.
  Generic,
};

/// Parameter vector lambda of a set, with a kind tag.
class ParamVector {
 public:
  ParamVector() = default;
  static ParamVector rigid_pose(double x, double y, double theta);
  static ParamVector rigid_pose(const Eigen::Vector3d& pose);
  static ParamVector generic(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const { return values_; }
  ParamKind kind() const { return kind_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  /// Same kind, new values. Throws InvalidInput on a size change for rigid poses.
  ParamVector with_values(Eigen::VectorXd values) const;

 private:
  ParamVector(Eigen::VectorXd values, ParamKind kind);

  Eigen::VectorXd values_;
  ParamKind kind_ = ParamKind::Generic;
};

/// Constraint stack F(x, lambda) and its derivative blocks at one point.
struct StackEval {
  Eigen::VectorXd value;       ///< n_F
  Eigen::MatrixXd jac_x;       ///< n_F x N
  Eigen::MatrixXd jac_param;   ///< n_F x M
  std::vector<Eigen::MatrixXd> hess_xx;     ///< n_F blocks, N x N
  std::vector<Eigen::MatrixXd> hess_xparam; ///< n_F blocks, N x M
};

/// A convex set {x : F^k(x, lambda) <= 0 for all k} with derivative oracles.
class ConstraintStack {
 public:
  virtual ~ConstraintStack() = default;

  virtual Eigen::Index num_constraints() const = 0;
  virtual Eigen::Index ambient_dim() const = 0;
  virtual Eigen::Index param_dim() const = 0;
  virtual ParamKind param_kind() const = 0;
  virtual StackEval evaluate(const Eigen::VectorXd& x, const ParamVector& params) const = 0;
  /// Value only.
  virtual Eigen::VectorXd values(const Eigen::VectorXd& x, const ParamVector& params) const {
    return evaluate(x, params).value;
  }
  /// Start point for interior-point searches.
  virtual Eigen::VectorXd reference_point(const ParamVector& params) const = 0;
  /// Cheap structural check for compactness. Returns false when unbounded.
  /// The default ray-marches from the reference point.
  virtual bool is_bounded(const ParamVector& params) const;
  virtual bool affine_in_x() const { return false; }
};

/// Polytope A0 y <= b0 in the body frame, placed at pose (x_c, theta):
/// F(x, lambda) = A0 R(theta)^T (x - x_c) - b0.
class RigidPolytope final : public ConstraintStack {
 public:
  /// Requires A0 to be q x 2 with full column rank and finite entries.
  RigidPolytope(Eigen::MatrixXd base_a, Eigen::VectorXd base_b);

  /// Regular k-gon with circumradius `radius`, one facet normal along +x.
  static RigidPolytope regular_polygon(int sides, double radius);
  /// Axis-aligned box with the given half-widths.
  static RigidPolytope box(double half_x, double half_y);

  const Eigen::MatrixXd& base_a() const { return base_a_; }
  const Eigen::VectorXd& base_b() const { return base_b_; }

  Eigen::Index num_constraints() const override { return base_a_.rows(); }
  Eigen::Index ambient_dim() const override { return 2; }
  Eigen::Index param_dim() const override { return 3; }
  ParamKind param_kind() const override { return ParamKind::RigidPose2d; }
  StackEval evaluate(const Eigen::VectorXd& x, const ParamVector& params) const override;
  Eigen::VectorXd values(const Eigen::VectorXd& x, const ParamVector& params) const override;
  Eigen::VectorXd reference_point(const ParamVector& params) const override;
  bool is_bounded(const ParamVector& params) const override;
  bool affine_in_x() const override { return true; }

  /// World-frame halfspaces A x <= b at the given pose.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> world_halfspaces(const ParamVector& pose) const;
  /// Vertices of the exact polytope at the pose, counterclockwise.
  std::vector<Eigen::Vector2d> vertices(const ParamVector& pose) const;
  /// Recession-cone test on A0: bounded iff the facet normals leave no
  /// angular gap of pi or more.
  bool base_is_bounded() const;

 private:
  Eigen::MatrixXd base_a_;
  Eigen::VectorXd base_b_;
};

/// Constraint stack backed by a user callback, for sets beyond rigid polytopes.
class FunctionalStack final : public ConstraintStack {
 public:
  using Evaluator = std::function<StackEval(const Eigen::VectorXd&, const ParamVector&)>;
  using Reference = std::function<Eigen::VectorXd(const ParamVector&)>;

  FunctionalStack(Eigen::Index num_constraints, Eigen::Index ambient_dim, Eigen::Index param_dim,
                  Evaluator evaluator, Reference reference);

  Eigen::Index num_constraints() const override { return num_constraints_; }
  Eigen::Index ambient_dim() const override { return ambient_dim_; }
  Eigen::Index param_dim() const override { return param_dim_; }
  ParamKind param_kind() const override { return ParamKind::Generic; }
  StackEval evaluate(const Eigen::VectorXd& x, const ParamVector& params) const override;
  Eigen::VectorXd reference_point(const ParamVector& params) const override;

 private:
  Eigen::Index num_constraints_;
  Eigen::Index ambient_dim_;
  Eigen::Index param_dim_;
  Evaluator evaluator_;
  Reference reference_;
};

/// A constraint stack together with its smoothing parameter. Immutable and
/// cheap to copy.
class SetSpec {
 public:
  SetSpec(std::shared_ptr<const ConstraintStack> stack, SmoothMaxParams smoothing);

  const ConstraintStack& stack() const { return *stack_; }
  std::shared_ptr<const ConstraintStack> stack_ptr() const { return stack_; }
  SmoothMaxParams smoothing() const { return smoothing_; }
  double epsilon() const { return smoothing_.epsilon; }
  Eigen::Index num_constraints() const { return stack_->num_constraints(); }
  Eigen::Index ambient_dim() const { return stack_->ambient_dim(); }
  Eigen::Index param_dim() const { return stack_->param_dim(); }
  /// log(n_F) / eps, the level of the smoothed set.
  double level() const;

  /// Copy with a different epsilon.
  SetSpec with_epsilon(double epsilon) const;

 private:
  std::shared_ptr<const ConstraintStack> stack_;
  SmoothMaxParams smoothing_;
};

/// Evaluates F and all derivative blocks, validating dimensions.
StackEval eval_stack(const SetSpec& set, const Eigen::VectorXd& x, const ParamVector& params);

/// LSE_eps^+(F(x, lambda)) - log(n_F)/eps. Nonpositive iff x is in the
/// smoothed set.
double membership_margin(const SetSpec& set, const Eigen::VectorXd& x, const ParamVector& params);

/// Smoothed constraint c(x) = LSE_eps^+(F(x)) - log(n_F)/eps and its
/// x-derivatives, composed through the stack.
struct SmoothedConstraint {
  double value = 0.0;
  Eigen::VectorXd gradient;  ///< N
  Eigen::MatrixXd hessian;   ///< N x N
  LseEval lse;
  StackEval stack;
};

SmoothedConstraint smoothed_constraint(const SetSpec& set, const Eigen::VectorXd& x,
                                       const ParamVector& params);

/// Point with max_k F^k(x, lambda) <= -1e-9, by damped Newton on
/// LSE^+ of the stack with a tightening schedule. Throws EmptyInterior.
Eigen::VectorXd find_interior_point(const SetSpec& set, const ParamVector& params);

/// Minimizer of the smoothed constraint c(x) for the set's own epsilon.
/// Throws EmptyInterior when the minimum is not strictly negative.
Eigen::VectorXd smoothed_center(const SetSpec& set, const ParamVector& params);

struct SampleCheck {
  Eigen::Index rank = 0;
  bool rank_ok = false;
  bool convexity_ok = false;
  bool compact_ok = false;
  std::string detail;

  bool passed() const { return rank_ok && convexity_ok && compact_ok; }
};

struct StandardConditionsReport {
  std::vector<SampleCheck> samples;

  bool all_passed() const;
};

/// Sampled checks of the standard conditions: column rank of dF/dx
/// (tolerance 1e-10 times the largest singular value), midpoint convexity of
/// each F^k and compactness. Failures are reported, not thrown.
StandardConditionsReport verify_standard_conditions(const SetSpec& set,
                                                    std::span<const ParamVector> samples,
                                                    unsigned seed = 7);

/// 2D rotation matrix.
Eigen::Matrix2d rotation(double theta);

}  // namespace lsecbf
