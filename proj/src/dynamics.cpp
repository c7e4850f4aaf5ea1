#include "lsecbf/dynamics.hpp"

#include <cmath>

#include "lsecbf/errors.hpp"

namespace lsecbf {

Eigen::VectorXd ControlAffineDynamics::rate(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                            const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (lambda.size() != state_dim()) throw InvalidInput("state length does not match dynamics");
  if (u.size() != input_dim()) throw InvalidInput("input length does not match dynamics");
  return drift(lambda) + input_matrix(lambda) * u;
}

SingleIntegrator::SingleIntegrator(Eigen::Index dim) : dim_(dim) {
  if (dim <= 0) throw InvalidInput("single integrator dimension must be positive");
}

Eigen::VectorXd SingleIntegrator::drift(const Eigen::Ref<const Eigen::VectorXd>&) const {
  return Eigen::VectorXd::Zero(dim_);
}

Eigen::MatrixXd SingleIntegrator::input_matrix(const Eigen::Ref<const Eigen::VectorXd>&) const {
  return Eigen::MatrixXd::Identity(dim_, dim_);
}

Eigen::Matrix2d unicycle_transform(double theta, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("unicycle offset b must be positive");
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d t;
  t << c, s, -s / b, c / b;
  return t;
}

Eigen::Matrix2d unicycle_output_jacobian(double theta, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("unicycle offset b must be positive");
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d t;
  t << c, -b * s, s, b * c;
  return t;
}

UnicycleAgent::UnicycleAgent(double b) : b_(b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("unicycle offset b must be positive");
}

Eigen::VectorXd UnicycleAgent::drift(const Eigen::Ref<const Eigen::VectorXd>&) const {
  return Eigen::VectorXd::Zero(3);
}

Eigen::MatrixXd UnicycleAgent::input_matrix(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  const double th = lambda[2];
  Eigen::Matrix<double, 3, 2> kin;
  kin << std::cos(th), 0.0, std::sin(th), 0.0, 0.0, 1.0;
  return kin * unicycle_transform(th, b_);
}

Eigen::Vector2d UnicycleAgent::output(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  return {lambda[0] + b_ * std::cos(lambda[2]), lambda[1] + b_ * std::sin(lambda[2])};
}

Eigen::Vector2d UnicycleAgent::body_velocity(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                             const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return unicycle_transform(lambda[2], b_) * u;
}

Eigen::MatrixXd modified_g(const UnicycleAgent& agent, const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  return agent.input_matrix(lambda);
}

std::string_view to_string(Integrator m) { return m == Integrator::Euler ? "euler" : "rk4"; }

Eigen::VectorXd integrate_step(const ControlAffineDynamics& dyn, const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               const Eigen::Ref<const Eigen::VectorXd>& u, double dt, Integrator method) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("integration step must be positive");
  Eigen::VectorXd next;
  if (method == Integrator::Euler) {
    next = lambda + dt * dyn.rate(lambda, u);
  } else {
    const Eigen::VectorXd k1 = dyn.rate(lambda, u);
    const Eigen::VectorXd k2 = dyn.rate(lambda + 0.5 * dt * k1, u);
    const Eigen::VectorXd k3 = dyn.rate(lambda + 0.5 * dt * k2, u);
    const Eigen::VectorXd k4 = dyn.rate(lambda + dt * k3, u);
    next = lambda + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!next.allFinite()) throw NumericalFailure("integration produced a non-finite state");
  return next;
}

ParamVector integrate_step(const ControlAffineDynamics& dyn, const ParamVector& lambda,
                           const Eigen::Ref<const Eigen::VectorXd>& u, double dt, Integrator method) {
  return lambda.with_values(integrate_step(dyn, lambda.values(), u, dt, method));
}

}  // namespace lsecbf
