#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>

#include "lsecbf/distance.hpp"
#include "lsecbf/oracles.hpp"
#include "lsecbf/set_model.hpp"

namespace lsecbf::oracles {

/// Random compact polygon with q facets: sorted normal angles with every
/// gap below pi, normal lengths in [0.5, 2] and offsets that keep the origin
/// strictly inside.
RigidPolytope random_polytope(std::mt19937_64& rng, int min_facets = 3, int max_facets = 8);

/// Smallest facet normal length of the body-frame polytope.
double min_normal_norm(const RigidPolytope& poly);

struct PairCase {
  std::uint64_t seed = 0;
  RigidPolytope ego = RigidPolytope::box(1.0, 1.0);
  RigidPolytope obstacle = RigidPolytope::box(1.0, 1.0);
  Eigen::Vector3d ego_pose = Eigen::Vector3d::Zero();
  Eigen::Vector3d obstacle_pose = Eigen::Vector3d::Zero();

  DistanceProblem problem(double epsilon) const;
  /// Distance between the exact polytopes.
  double exact_distance() const;
};

/// Pair whose exact polytopes are at least `min_gap` apart, deterministic in seed.
PairCase random_disjoint_pair(std::uint64_t seed, double min_gap = 0.3, double max_gap = 2.0);

/// Distance and gradient checks of one corpus case against the exact-distance
/// and finite-difference oracles.
struct CaseReport {
  std::uint64_t seed = 0;
  DistanceSolution solution;
  double exact = 0.0;
  double distance_error = 0.0;  ///< |sqrt(2 d) - exact|
  double distance_tol = 0.0;    ///< 2 log(n_F + 1) / (eps * min normal norm)
  bool distance_ok = false;     ///< Optimal, within tolerance, active, mu positive
  OracleReport gradient;        ///< KKT gradient vs central differences
  double condition_estimate = 0.0;
  double translation_sum = 0.0;  ///< max |dd/dx_c,E + dd/dx_c,j|
  bool gradient_ok = false;
  std::string failure;
};

CaseReport check_case(const PairCase& pc, double epsilon, double fd_step = 1e-5);

}  // namespace lsecbf::oracles
