#include "lsecbf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "lsecbf/errors.hpp"
#include "lsecbf/oracles.hpp"
#include "lsecbf/sensitivity.hpp"

namespace lsecbf::oracles {

RigidPolytope random_polytope(std::mt19937_64& rng, int min_facets, int max_facets) {
  std::uniform_int_distribution<int> count(min_facets, max_facets);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const int q = count(rng);
  std::vector<double> angles;
  for (;;) {
    angles.clear();
    for (int k = 0; k < q; ++k) angles.push_back(two_pi * unit(rng));
    std::sort(angles.begin(), angles.end());
    double widest = two_pi - angles.back() + angles.front();
    for (int k = 1; k < q; ++k) widest = std::max(widest, angles[k] - angles[k - 1]);
    if (widest < 0.9 * std::numbers::pi) break;
  }
  Eigen::MatrixXd a(q, 2);
  Eigen::VectorXd b(q);
  for (int k = 0; k < q; ++k) {
    const double len = 0.5 + 1.5 * unit(rng);
    a(k, 0) = len * std::cos(angles[static_cast<std::size_t>(k)]);
    a(k, 1) = len * std::sin(angles[static_cast<std::size_t>(k)]);
    b[k] = len * (0.4 + 0.8 * unit(rng));
  }
  return RigidPolytope(a, b);
}

double min_normal_norm(const RigidPolytope& poly) { return poly.base_a().rowwise().norm().minCoeff(); }

DistanceProblem PairCase::problem(double epsilon) const {
  return DistanceProblem{SetSpec(std::make_shared<RigidPolytope>(ego), SmoothMaxParams{epsilon}),
                         SetSpec(std::make_shared<RigidPolytope>(obstacle), SmoothMaxParams{epsilon}),
                         ParamVector::rigid_pose(ego_pose), ParamVector::rigid_pose(obstacle_pose)};
}

double PairCase::exact_distance() const {
  return exact_polytope_distance(ego.base_a(), ego.base_b(), ego_pose, obstacle.base_a(), obstacle.base_b(),
                                 obstacle_pose);
}

PairCase random_disjoint_pair(std::uint64_t seed, double min_gap, double max_gap) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  PairCase pc;
  pc.seed = seed;
  pc.ego = random_polytope(rng);
  pc.obstacle = random_polytope(rng);
  pc.ego_pose = Eigen::Vector3d(4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0, two_pi * unit(rng) - std::numbers::pi);
  const double dir = two_pi * unit(rng);
  const double target = min_gap + (max_gap - min_gap) * unit(rng);
  pc.obstacle_pose.z() = two_pi * unit(rng) - std::numbers::pi;
  // slide the obstacle outward along dir until the exact gap reaches target
  const Eigen::Vector2d u(std::cos(dir), std::sin(dir));
  double s = 0.0;
  for (int it = 0; it < 200; ++it) {
    pc.obstacle_pose.head<2>() = pc.ego_pose.head<2>() + s * u;
    const double gap = pc.exact_distance();
    if (std::abs(gap - target) < 1e-9) break;
    s += gap > 0.0 ? target - gap : 0.2;
  }
  return pc;
}

CaseReport check_case(const PairCase& pc, double epsilon, double fd_step) {
  CaseReport r;
  r.seed = pc.seed;
  const DistanceProblem prob = pc.problem(epsilon);
  r.solution = solve_distance(prob);
  r.exact = pc.exact_distance();
  const auto q = std::max(pc.ego.num_constraints(), pc.obstacle.num_constraints());
  r.distance_tol =
      2.0 * std::log(static_cast<double>(q) + 1.0) / (epsilon * std::min(min_normal_norm(pc.ego), min_normal_norm(pc.obstacle)));
  const auto& s = r.solution;
  if (s.status != SolveStatus::Optimal) {
    r.failure = "status " + std::string(to_string(s.status));
    return r;
  }
  r.distance_error = std::abs(std::sqrt(2.0 * s.value) - r.exact);
  r.distance_ok = r.distance_error <= r.distance_tol && s.kkt_residual <= 1e-8 &&
                  s.constraint_residuals.cwiseAbs().maxCoeff() <= 1e-6 && s.mu.minCoeff() >= 1e-10;
  if (!r.distance_ok) r.failure = "distance";

  DistanceGradient grad;
  try {
    grad = distance_gradient(prob, s);
  } catch (const std::exception& e) {
    r.failure = e.what();
    return r;
  }
  r.condition_estimate = grad.condition_estimate;
  Eigen::VectorXd theta(6), production(6);
  theta << pc.ego_pose, pc.obstacle_pose;
  production << grad.d_dlambda_ego, grad.d_dlambda_obstacle;
  auto value_at = [&](const Eigen::VectorXd& t) {
    DistanceProblem p = prob;
    p.ego_params = ParamVector::rigid_pose(Eigen::Vector3d(t.head<3>()));
    p.obstacle_params = ParamVector::rigid_pose(Eigen::Vector3d(t.tail<3>()));
    const DistanceSolution sol = solve_distance(p);
    if (sol.status != SolveStatus::Optimal) throw NumericalFailure("perturbed solve not optimal");
    return sol.value;
  };
  try {
    r.gradient = compare(finite_difference_gradient(value_at, theta, fd_step), production, 1e-4, 1e-7);
  } catch (const std::exception& e) {
    r.failure = e.what();
    return r;
  }
  r.translation_sum = (production.segment<2>(0) + production.segment<2>(3)).cwiseAbs().maxCoeff();
  r.gradient_ok = r.gradient.pass && r.condition_estimate < kMaxConditionEstimate && r.translation_sum <= 1e-7;
  if (!r.gradient_ok && r.failure.empty()) r.failure = "gradient " + r.gradient.summary();
  return r;
}

}  // namespace lsecbf::oracles
