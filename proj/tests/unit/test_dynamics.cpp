#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lsecbf/dynamics.hpp"
#include "lsecbf/errors.hpp"
#include "support.hpp"

using namespace lsecbf;
using testing::vec;

namespace {

// Unicycle driven directly by (v, omega), for the Richardson check.
class BodyRateUnicycle final : public ControlAffineDynamics {
 public:
  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index input_dim() const override { return 2; }
  Eigen::VectorXd drift(const Eigen::Ref<const Eigen::VectorXd>&) const override { return Eigen::VectorXd::Zero(3); }
  Eigen::MatrixXd input_matrix(const Eigen::Ref<const Eigen::VectorXd>& l) const override {
    Eigen::MatrixXd g(3, 2);
    g << std::cos(l[2]), 0, std::sin(l[2]), 0, 0, 1;
    return g;
  }
};

Eigen::VectorXd run(const ControlAffineDynamics& dyn, Eigen::VectorXd x, const Eigen::VectorXd& u, double dt, double tf,
                    Integrator m) {
  const int steps = static_cast<int>(std::lround(tf / dt));
  for (int k = 0; k < steps; ++k) x = integrate_step(dyn, x, u, dt, m);
  return x;
}

}  // namespace

TEST_CASE("unicycle_transform examples") {
  Eigen::Matrix2d a;
  a << 1, 0, 0, 2;
  CHECK(unicycle_transform(0.0, 0.5).isApprox(a));
  Eigen::Matrix2d b;
  b << 0, 1, -1, 0;
  CHECK((unicycle_transform(std::numbers::pi / 2, 1.0) - b).norm() < 1e-15);
  CHECK_THROWS_AS(unicycle_transform(0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(unicycle_transform(0.0, -0.1), InvalidInput);
}

TEST_CASE("T times its inverse is the identity") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> th(-10.0, 10.0), bb(0.05, 3.0);
  for (int k = 0; k < 500; ++k) {
    const double t = th(rng), b = bb(rng);
    CHECK((unicycle_output_jacobian(t, b) * unicycle_transform(t, b) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("modified input matrix") {
  const UnicycleAgent agent(0.5);
  Eigen::MatrixXd expect(3, 2);
  expect << 1, 0, 0, 0, 0, 2;
  CHECK(modified_g(agent, vec({0, 0, 0})).isApprox(expect));
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> th(-10.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(modified_g(agent, vec({0, 0, th(rng)}))).rank() == 2);
  }
  CHECK(agent.drift(vec({1, 2, 3})).isZero());
}

TEST_CASE("output rate equals the linearized input") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> s(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const UnicycleAgent agent(0.1 + std::abs(s(rng)));
    const Eigen::VectorXd lam = vec({s(rng), s(rng), 3.0 * s(rng)});
    const Eigen::VectorXd u = vec({s(rng), s(rng)});
    const double h = 1e-4;
    const Eigen::VectorXd fwd = integrate_step(agent, lam, u, h, Integrator::RK4);
    const Eigen::VectorXd bwd = integrate_step(agent, lam, -u, h, Integrator::RK4);
    const Eigen::Vector2d rate = (agent.output(fwd) - agent.output(bwd)) / (2.0 * h);
    CHECK((rate - u).norm() < 1e-8);
  }
}

TEST_CASE("integrator examples") {
  const SingleIntegrator si(3);
  const Eigen::VectorXd x0 = vec({1, 2, 3});
  const Eigen::VectorXd u = vec({0.5, -1, 2});
  for (Integrator m : {Integrator::Euler, Integrator::RK4}) {
    CHECK((integrate_step(si, x0, u, 0.1, m) - (x0 + 0.1 * u)).norm() < 1e-15);
  }
  const BodyRateUnicycle spin;
  CHECK(integrate_step(spin, vec({0, 0, 0.7}), vec({0, 1}), 0.1, Integrator::RK4)[2] == 0.7 + 0.1);
  CHECK_THROWS_AS(integrate_step(si, x0, u, 0.0), InvalidInput);
  CHECK_THROWS_AS(integrate_step(si, x0, u, -0.1), InvalidInput);
  CHECK_THROWS_AS(integrate_step(si, x0, vec({1e308, 0, 0}), 1e10), NumericalFailure);
  CHECK(to_string(Integrator::RK4) == "rk4");
}

TEST_CASE("ParamVector overload keeps the kind") {
  const UnicycleAgent agent(0.25);
  const ParamVector next = integrate_step(agent, ParamVector::rigid_pose(0, 0, 0), vec({1, 0}), 0.02);
  CHECK(next.kind() == ParamKind::RigidPose2d);
  CHECK(next[0] == doctest::Approx(0.02));
}

TEST_CASE("RK4 and Euler gap shrinks with dt squared on a curved arc") {
  const BodyRateUnicycle uni;
  const Eigen::VectorXd x0 = vec({0, 0, 0.2});
  const Eigen::VectorXd u = vec({1.0, 0.8});
  auto gap = [&](double dt) {
    return (run(uni, x0, u, dt, 0.4, Integrator::RK4) - run(uni, x0, u, dt, 0.4, Integrator::Euler)).norm();
  };
  // the accumulated gap is first order; one step isolates the local O(dt^2) term
  auto local = [&](double dt) {
    return (integrate_step(uni, x0, u, dt, Integrator::RK4) - integrate_step(uni, x0, u, dt, Integrator::Euler)).norm();
  };
  CHECK(local(0.1) / local(0.05) >= 3.5);
  CHECK(gap(0.1) / gap(0.05) >= 1.8);
}

TEST_CASE("zero input is a fixed point") {
  const UnicycleAgent agent(0.3);
  const Eigen::VectorXd lam = vec({1.5, -2.0, 4.0});
  CHECK(integrate_step(agent, lam, Eigen::VectorXd::Zero(2), 0.5) == lam);
}

TEST_CASE("moving the body commutes with moving its polytope") {
  const RigidPolytope box = RigidPolytope::box(0.6, 0.4);
  const UnicycleAgent agent(0.25);
  const Eigen::VectorXd lam = vec({0.3, -0.7, 0.9});
  const Eigen::VectorXd next = integrate_step(agent, lam, vec({0.8, -0.4}), 0.02);
  const auto before = box.vertices(ParamVector::rigid_pose(Eigen::Vector3d(lam)));
  const auto after = box.vertices(ParamVector::rigid_pose(Eigen::Vector3d(next)));
  const Eigen::Matrix2d delta = rotation(next[2] - lam[2]);
  for (std::size_t k = 0; k < before.size(); ++k) {
    const Eigen::Vector2d moved = delta * (before[k] - lam.head<2>()) + next.head<2>();
    CHECK((moved - after[k]).norm() < 1e-9);
  }
}

TEST_CASE("input matrix is locally Lipschitz") {
  const UnicycleAgent agent(0.25);
  const Eigen::VectorXd lam = vec({0.0, 0.0, 0.4});
  double prev = 0.0;
  for (double h = 1e-1; h >= 1e-5; h /= 10.0) {
    const Eigen::VectorXd shifted = lam + vec({0, 0, h});
    const double q = (agent.input_matrix(shifted) - agent.input_matrix(lam)).norm() / h;
    CHECK(std::isfinite(q));
    if (prev > 0.0) CHECK(q < 2.0 * prev);
    prev = q;
  }
}
