#pragma once

#include <Eigen/Dense>
#include <memory>

#include "lsecbf/distance.hpp"
#include "lsecbf/set_model.hpp"

namespace testing {

inline lsecbf::SetSpec box_set(double eps, double half = 1.0) {
  return lsecbf::SetSpec(std::make_shared<lsecbf::RigidPolytope>(lsecbf::RigidPolytope::box(half, half)),
                         lsecbf::SmoothMaxParams{eps});
}

inline lsecbf::DistanceProblem box_pair(double eps, const Eigen::Vector3d& ego, const Eigen::Vector3d& obstacle) {
  return {box_set(eps), box_set(eps), lsecbf::ParamVector::rigid_pose(ego), lsecbf::ParamVector::rigid_pose(obstacle)};
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace testing
