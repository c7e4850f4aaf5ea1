#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lsecbf/corpus.hpp"
#include "lsecbf/errors.hpp"
#include "lsecbf/oracles.hpp"
#include "lsecbf/set_model.hpp"
#include "support.hpp"

using namespace lsecbf;
using testing::box_set;
using testing::vec;

namespace {

const RigidPolytope kUnitBox = RigidPolytope::box(1.0, 1.0);

Eigen::MatrixXd triangle_a() {
  Eigen::MatrixXd a(3, 2);
  a << 0.0, -1.0, 1.0, 1.0, -1.0, 1.0;
  return a;
}

}  // namespace

TEST_CASE("eval_stack at identity pose") {
  const SetSpec s = box_set(1.0);
  const StackEval e = eval_stack(s, vec({0.0, 0.0}), ParamVector::rigid_pose(0, 0, 0));
  CHECK(e.value.isApprox(-Eigen::VectorXd::Ones(4)));
  CHECK(e.jac_x.isApprox(kUnitBox.base_a()));
  for (const auto& h : e.hess_xx) CHECK(h.isZero());
}

TEST_CASE("eval_stack is translation invariant in the body frame") {
  const StackEval e = eval_stack(box_set(1.0), vec({2.0, 0.0}), ParamVector::rigid_pose(2, 0, 0));
  CHECK(e.value.isApprox(-Eigen::VectorXd::Ones(4)));
}

TEST_CASE("eval_stack applies the inverse rotation") {
  const StackEval e = eval_stack(box_set(1.0), vec({1.0, 0.0}), ParamVector::rigid_pose(0, 0, std::numbers::pi / 2));
  const Eigen::VectorXd expect = kUnitBox.base_a() * Eigen::Vector2d(0.0, -1.0) - kUnitBox.base_b();
  CHECK((e.value - expect).norm() < 1e-12);
}

TEST_CASE("eval_stack rejects dimension mismatches") {
  CHECK_THROWS_AS(eval_stack(box_set(1.0), vec({0.0, 0.0, 0.0}), ParamVector::rigid_pose(0, 0, 0)), InvalidInput);
  CHECK_THROWS_AS(ParamVector::rigid_pose(0, 0, 0).with_values(vec({1.0, 2.0})), InvalidInput);
  CHECK_THROWS_AS(eval_stack(box_set(1.0), vec({0.0, 0.0}), ParamVector::generic(vec({1.0, 2.0}))), InvalidInput);
}

TEST_CASE("membership_margin examples") {
  CHECK(membership_margin(box_set(1.0), vec({0.0, 0.0}), ParamVector::rigid_pose(0, 0, 0)) ==
        doctest::Approx(-0.4814619195654425938).epsilon(1e-14));
  CHECK(membership_margin(box_set(1.0), vec({10.0, 0.0}), ParamVector::rigid_pose(0, 0, 0)) > 0.0);
}

TEST_CASE("find_interior_point examples") {
  const Eigen::VectorXd a = find_interior_point(box_set(1.0), ParamVector::rigid_pose(5, 3, 0));
  CHECK(kUnitBox.values(a, ParamVector::rigid_pose(5, 3, 0)).maxCoeff() <= -1e-9);
  CHECK((a - vec({5.0, 3.0})).norm() < 1.0);
  const Eigen::VectorXd b = find_interior_point(box_set(1.0), ParamVector::rigid_pose(0, 0, 1.0));
  CHECK(kUnitBox.values(b, ParamVector::rigid_pose(0, 0, 1.0)).maxCoeff() <= -1e-9);
}

TEST_CASE("degenerate and empty polytopes are rejected") {
  Eigen::MatrixXd strip(2, 2);
  strip << 1, 0, -1, 0;
  CHECK_THROWS_AS(RigidPolytope(strip, vec({1.0, 1.0})), InvalidInput);

  // x <= -1 and -x <= -1 has no interior
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  const SetSpec empty(std::make_shared<RigidPolytope>(a, vec({-1.0, -1.0, 1.0, 1.0})), {1.0});
  CHECK_THROWS_AS(find_interior_point(empty, ParamVector::rigid_pose(0, 0, 0)), EmptyInterior);
}

TEST_CASE("verify_standard_conditions") {
  const std::vector<ParamVector> samples = {ParamVector::rigid_pose(0, 0, 0), ParamVector::rigid_pose(1, -2, 0.7)};
  CHECK(verify_standard_conditions(box_set(1.0), samples).all_passed());

  Eigen::MatrixXd open(3, 2);
  open << 1, 0, -1, 0, 0, 1;
  const SetSpec strip(std::make_shared<RigidPolytope>(open, vec({1.0, 1.0, 1.0})), {1.0});
  const auto report = verify_standard_conditions(strip, samples);
  CHECK_FALSE(report.all_passed());
  for (const auto& s : report.samples) {
    CHECK(s.rank_ok);
    CHECK_FALSE(s.compact_ok);
  }

  const SetSpec tri(std::make_shared<RigidPolytope>(triangle_a(), vec({1.0, 1.0, 1.0})), {1.0});
  const auto tri_report = verify_standard_conditions(tri, samples);
  CHECK(tri_report.all_passed());
  CHECK(tri_report.samples[0].rank == 2);
}

TEST_CASE("rigid motion consistency") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const RigidPolytope p = oracles::random_polytope(rng);
    const Eigen::Vector2d x(u(rng), u(rng));
    const Eigen::Vector3d pose(u(rng), u(rng), u(rng));
    const Eigen::Vector2d moved = rotation(pose.z()) * x + pose.head<2>();
    const Eigen::VectorXd lhs = p.values(moved, ParamVector::rigid_pose(pose));
    const Eigen::VectorXd rhs = p.values(x, ParamVector::rigid_pose(0, 0, 0));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("derivative blocks match central differences") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const RigidPolytope p = oracles::random_polytope(rng);
    const Eigen::VectorXd x = vec({u(rng), u(rng)});
    const Eigen::VectorXd lam = vec({u(rng), u(rng), u(rng)});
    const StackEval e = p.evaluate(x, ParamVector::rigid_pose(Eigen::Vector3d(lam)));
    for (Eigen::Index i = 0; i < p.num_constraints(); ++i) {
      auto in_x = [&](const Eigen::VectorXd& y) { return p.values(y, ParamVector::rigid_pose(Eigen::Vector3d(lam)))[i]; };
      auto in_lam = [&](const Eigen::VectorXd& l) { return p.values(x, ParamVector::rigid_pose(Eigen::Vector3d(l)))[i]; };
      CHECK(oracles::compare(oracles::finite_difference_gradient(in_x, x, 1e-6), e.jac_x.row(i).transpose(), 1e-5, 1e-8)
                .pass);
      CHECK(oracles::compare(oracles::finite_difference_gradient(in_lam, lam, 1e-6), e.jac_param.row(i).transpose(), 1e-5,
                             1e-8)
                .pass);
      // d/dlambda of dF_i/dx, one x-coordinate at a time
      for (Eigen::Index c = 0; c < 2; ++c) {
        auto dfdx = [&](const Eigen::VectorXd& l) {
          return p.evaluate(x, ParamVector::rigid_pose(Eigen::Vector3d(l))).jac_x(i, c);
        };
        CHECK(oracles::compare(oracles::finite_difference_gradient(dfdx, lam, 1e-6),
                               e.hess_xparam[static_cast<std::size_t>(i)].row(c).transpose(), 1e-5, 1e-8)
                  .pass);
      }
    }
  }
}

TEST_CASE("boxes: points of the exact set lie in the smoothed set") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> log_eps(std::log(0.5 * std::log(2.0)), std::log(400.0));
  for (int k = 0; k < 500; ++k) {
    const SetSpec s = box_set(std::exp(log_eps(rng)));
    CHECK(membership_margin(s, vec({u(rng), u(rng)}), ParamVector::rigid_pose(0, 0, 0)) <= 0.0);
    // corners are the extreme case
    CHECK(membership_margin(s, vec({1.0, 1.0}), ParamVector::rigid_pose(0, 0, 0)) <= 1e-15);
  }
}

TEST_CASE("triangle vertices stay outside the smoothed set at every epsilon") {
  // At a vertex two facets are active and the third is strictly negative, so
  // the margin is log((3 + z) / 3) / eps with z > 0.
  const SetSpec base(std::make_shared<RigidPolytope>(triangle_a(), vec({1.0, 1.0, 1.0})), {1.0});
  const RigidPolytope& tri = dynamic_cast<const RigidPolytope&>(base.stack());
  const auto verts = tri.vertices(ParamVector::rigid_pose(0, 0, 0));
  REQUIRE(verts.size() == 3);
  for (double eps = 1.0; eps <= 1024.0; eps *= 2.0) {
    for (const auto& v : verts) {
      const Eigen::VectorXd f = tri.values(v, ParamVector::rigid_pose(0, 0, 0));
      const double z = std::exp(eps * f.minCoeff());
      const double exact = std::log1p(z / 3.0) / eps;
      CHECK(exact >= 0.0);
      const double m = membership_margin(base.with_epsilon(eps), v, ParamVector::rigid_pose(0, 0, 0));
      CHECK(std::abs(m - exact) <= 1e-15);
      // resolvable against the rounding of value - level
      if (exact > 1e-14) CHECK(m > 0.0);
    }
  }
}

TEST_CASE("smoothed boundary moves toward the exact boundary as epsilon doubles") {
  const ParamVector pose = ParamVector::rigid_pose(0, 0, 0);
  for (const Eigen::Vector2d dir : {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1).normalized(), Eigen::Vector2d(0.3, 1).normalized()}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps = 1.0; eps <= 256.0; eps *= 2.0) {
      const SetSpec s = box_set(eps);
      double lo = 0.0, hi = 10.0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (membership_margin(s, mid * dir, pose) <= 0.0 ? lo : hi) = mid;
      }
      CHECK(lo <= prev);
      prev = lo;
    }
  }
}

TEST_CASE("level is log(n_F)/epsilon") {
  CHECK(box_set(4.0).level() == doctest::Approx(std::log(4.0) / 4.0));
  CHECK(box_set(4.0).with_epsilon(8.0).epsilon() == 8.0);
}
