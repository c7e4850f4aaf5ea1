#include "lsecbf/sensitivity.hpp"

#include <cmath>
#include <sstream>

#include "lsecbf/errors.hpp"

namespace lsecbf {
namespace {

// d/dlambda of grad_x c = J_x^T w, and d c/dlambda = w^T J_lambda.
struct ParamBlocks {
  Eigen::MatrixXd dgrad_dparam;  // N x M
  Eigen::RowVectorXd dc_dparam;  // 1 x M
};

ParamBlocks param_blocks(const SmoothedConstraint& sc) {
  const StackEval& se = sc.stack;
  const LseEval& le = sc.lse;
  ParamBlocks out;
  out.dgrad_dparam = se.jac_x.transpose() * le.hessian * se.jac_param;
  for (Eigen::Index k = 0; k < le.gradient.size(); ++k) {
    out.dgrad_dparam += le.gradient[k] * se.hess_xparam[k];
  }
  out.dc_dparam = le.gradient.transpose() * se.jac_param;
  return out;
}

}  // namespace

Eigen::MatrixXd KktSystem::jacobian() const {
  const Eigen::Index n2 = A.rows();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n2 + 2, n2 + 2);
  j.topLeftCorner(n2, n2) = A;
  j.topRightCorner(n2, 2) = B.transpose();
  j.bottomLeftCorner(2, n2) = mu.asDiagonal() * B;
  return j;
}

KktSystem assemble_kkt_system(const DistanceProblem& p, const DistanceSolution& s) {
  if (s.status != SolveStatus::Optimal) {
    throw InvalidInput("KKT sensitivity needs an Optimal distance solution, got " +
                       std::string(to_string(s.status)));
  }
  p.validate();
  const Eigen::Index n = p.ego.ambient_dim();
  const Eigen::Index me = p.ego.param_dim();
  const Eigen::Index mj = p.obstacle.param_dim();

  const SmoothedConstraint ce = smoothed_constraint(p.ego, s.z_ego, p.ego_params);
  const SmoothedConstraint co = smoothed_constraint(p.obstacle, s.z_obstacle, p.obstacle_params);

  KktSystem k;
  k.z_ego = s.z_ego;
  k.z_obstacle = s.z_obstacle;
  k.mu = s.mu;
  k.constraint_values << ce.value, co.value;
  k.ego_param_dim = me;
  k.obstacle_param_dim = mj;

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  k.A.resize(2 * n, 2 * n);
  k.A << eye + s.mu[0] * ce.hessian, -eye, -eye, eye + s.mu[1] * co.hessian;

  k.B = Eigen::MatrixXd::Zero(2, 2 * n);
  k.B.block(0, 0, 1, n) = ce.gradient.transpose();
  k.B.block(1, n, 1, n) = co.gradient.transpose();

  const ParamBlocks pe = param_blocks(ce);
  const ParamBlocks po = param_blocks(co);
  k.G_theta = Eigen::MatrixXd::Zero(2 * n + 2, me + mj);
  k.G_theta.block(0, 0, n, me) = s.mu[0] * pe.dgrad_dparam;
  k.G_theta.block(n, me, n, mj) = s.mu[1] * po.dgrad_dparam;
  k.G_theta.block(2 * n, 0, 1, me) = s.mu[0] * pe.dc_dparam;
  k.G_theta.block(2 * n + 1, me, 1, mj) = s.mu[1] * po.dc_dparam;
  return k;
}

SensitivityResult solve_sensitivity(const KktSystem& k) {
  const Eigen::Index n = k.ambient_dim();
  const Eigen::MatrixXd j = k.jacobian();
  if (!j.allFinite() || !k.G_theta.allFinite()) {
    throw SingularJacobian("KKT system has non-finite entries");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxConditionEstimate)) {
    std::ostringstream os;
    os << "KKT Jacobian condition estimate " << cond << " exceeds " << kMaxConditionEstimate;
    throw SingularJacobian(os.str());
  }

  SensitivityResult out;
  out.dnu_dtheta = -lu.solve(k.G_theta);
  if (!out.dnu_dtheta.allFinite()) throw SingularJacobian("KKT sensitivity solve is not finite");

  const Eigen::VectorXd diff = k.z_ego - k.z_obstacle;
  const Eigen::MatrixXd dz_rel = out.dnu_dtheta.topRows(n) - out.dnu_dtheta.middleRows(n, n);
  const Eigen::VectorXd grad = dz_rel.transpose() * diff;
  out.gradient.d_dlambda_ego = grad.head(k.ego_param_dim);
  out.gradient.d_dlambda_obstacle = grad.tail(k.obstacle_param_dim);
  out.gradient.condition_estimate = cond;
  return out;
}

DistanceGradient distance_gradient(const DistanceProblem& problem, const DistanceSolution& solution) {
  return solve_sensitivity(assemble_kkt_system(problem, solution)).gradient;
}

DistanceGradient envelope_gradient(const KktSystem& k) {
  const Eigen::Index n = k.ambient_dim();
  const Eigen::RowVectorXd grad = k.G_theta.row(2 * n) + k.G_theta.row(2 * n + 1);
  DistanceGradient out;
  out.d_dlambda_ego = grad.head(k.ego_param_dim).transpose();
  out.d_dlambda_obstacle = grad.tail(k.obstacle_param_dim).transpose();
  out.condition_estimate = 0.0;
  return out;
}

}  // namespace lsecbf
