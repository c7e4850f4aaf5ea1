#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "lsecbf/set_model.hpp"

namespace lsecbf {

/// lambda' = f(lambda) + g(lambda) u.
class ControlAffineDynamics {
 public:
  virtual ~ControlAffineDynamics() = default;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::VectorXd drift(const Eigen::Ref<const Eigen::VectorXd>& lambda) const = 0;
  virtual Eigen::MatrixXd input_matrix(const Eigen::Ref<const Eigen::VectorXd>& lambda) const = 0;

  Eigen::VectorXd rate(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                       const Eigen::Ref<const Eigen::VectorXd>& u) const;
};

/// lambda' = u.
class SingleIntegrator final : public ControlAffineDynamics {
 public:
  explicit SingleIntegrator(Eigen::Index dim);
  Eigen::Index state_dim() const override { return dim_; }
  Eigen::Index input_dim() const override { return dim_; }
  Eigen::VectorXd drift(const Eigen::Ref<const Eigen::VectorXd>& lambda) const override;
  Eigen::MatrixXd input_matrix(const Eigen::Ref<const Eigen::VectorXd>& lambda) const override;

 private:
  Eigen::Index dim_;
};

/// T^{-1}(theta) mapping the output rate y' to (v, omega). Throws InvalidInput for b <= 0.
Eigen::Matrix2d unicycle_transform(double theta, double b);
/// T(theta) = dy/d(v, omega).
Eigen::Matrix2d unicycle_output_jacobian(double theta, double b);

/// Unicycle with pose (x_c1, x_c2, theta) driven through the look-ahead point
/// y = x_c + b (cos theta, sin theta); the input is u = y'. Drift is zero.
class UnicycleAgent final : public ControlAffineDynamics {
 public:
  explicit UnicycleAgent(double b = 0.25);

  double offset() const { return b_; }

  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index input_dim() const override { return 2; }
  Eigen::VectorXd drift(const Eigen::Ref<const Eigen::VectorXd>& lambda) const override;
  /// The 3x2 matrix g(lambda) T^{-1}(theta).
  Eigen::MatrixXd input_matrix(const Eigen::Ref<const Eigen::VectorXd>& lambda) const override;

  Eigen::Vector2d output(const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
  /// (v, omega) for a linearized input.
  Eigen::Vector2d body_velocity(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                const Eigen::Ref<const Eigen::VectorXd>& u) const;

 private:
  double b_;
};

/// Same as UnicycleAgent::input_matrix.
Eigen::MatrixXd modified_g(const UnicycleAgent& agent, const Eigen::Ref<const Eigen::VectorXd>& lambda);

enum class Integrator { Euler, RK4 };

std::string_view to_string(Integrator method);

/// One explicit step with u held over [t, t + dt]. Throws InvalidInput for
/// dt <= 0 and NumericalFailure if the result is not finite.
Eigen::VectorXd integrate_step(const ControlAffineDynamics& dyn, const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               const Eigen::Ref<const Eigen::VectorXd>& u, double dt,
                               Integrator method = Integrator::RK4);

ParamVector integrate_step(const ControlAffineDynamics& dyn, const ParamVector& lambda,
                           const Eigen::Ref<const Eigen::VectorXd>& u, double dt,
                           Integrator method = Integrator::RK4);

}  // namespace lsecbf
