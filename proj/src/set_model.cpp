#include "lsecbf/set_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lsecbf/errors.hpp"
#include "newton.hpp"

namespace lsecbf {
namespace {

constexpr double kInteriorMargin = 1e-9;
constexpr int kInteriorMaxIterations = 200;

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw InvalidInput(std::string(what) + " has non-finite entries");
}

void check_dims(const ConstraintStack& stack, const Eigen::VectorXd& x, const ParamVector& params) {
  if (x.size() != stack.ambient_dim()) {
    std::ostringstream os;
    os << "point has dimension " << x.size() << ", set expects " << stack.ambient_dim();
    throw InvalidInput(os.str());
  }
  if (params.size() != stack.param_dim()) {
    std::ostringstream os;
    os << "parameter vector has length " << params.size() << ", set expects "
       << stack.param_dim();
    throw InvalidInput(os.str());
  }
}

// dR/dtheta transposed.
Eigen::Matrix2d rotation_derivative_t(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d m;
  m << -s, c, -c, -s;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamVector

ParamVector::ParamVector(Eigen::VectorXd values, ParamKind kind)
    : values_(std::move(values)), kind_(kind) {
  require_finite(values_, "parameter vector");
  if (kind_ == ParamKind::RigidPose2d && values_.size() != 3) {
    throw InvalidInput("rigid-pose-2d parameters need exactly 3 entries");
  }
}

ParamVector ParamVector::rigid_pose(double x, double y, double theta) {
  return ParamVector(Eigen::Vector3d(x, y, theta), ParamKind::RigidPose2d);
}

ParamVector ParamVector::rigid_pose(const Eigen::Vector3d& pose) {
  return ParamVector(Eigen::VectorXd(pose), ParamKind::RigidPose2d);
}

ParamVector ParamVector::generic(Eigen::VectorXd values) {
  return ParamVector(std::move(values), ParamKind::Generic);
}

ParamVector ParamVector::with_values(Eigen::VectorXd values) const {
  return ParamVector(std::move(values), kind_);
}

Eigen::Matrix2d rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

// ---------------------------------------------------------------------------
// ConstraintStack

bool ConstraintStack::is_bounded(const ParamVector& params) const {
  const Eigen::Index n = ambient_dim();
  const Eigen::VectorXd origin = reference_point(params);
  std::vector<Eigen::VectorXd> directions;
  for (Eigen::Index i = 0; i < n; ++i) {
    directions.push_back(Eigen::VectorXd::Unit(n, i));
    directions.push_back(-Eigen::VectorXd::Unit(n, i));
  }
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 32; ++k) {
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = normal(rng);
    directions.push_back(d.normalized());
  }
  for (const auto& d : directions) {
    bool leaves = false;
    for (double r = 1e-3; r <= 1e6; r *= 2.0) {
      if (values(origin + r * d, params).maxCoeff() > 0.0) {
        leaves = true;
        break;
      }
    }
    if (!leaves) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// RigidPolytope

RigidPolytope::RigidPolytope(Eigen::MatrixXd base_a, Eigen::VectorXd base_b)
    : base_a_(std::move(base_a)), base_b_(std::move(base_b)) {
  if (base_a_.cols() != 2) throw InvalidInput("polytope halfspace matrix must have 2 columns");
  if (base_a_.rows() < 1 || base_a_.rows() != base_b_.size()) {
    throw InvalidInput("polytope needs matching nonempty A0 rows and b0 entries");
  }
  if (!base_a_.allFinite() || !base_b_.allFinite()) {
    throw InvalidInput("polytope halfspaces must be finite");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(base_a_);
  const auto& sv = svd.singularValues();
  if (sv[0] == 0.0 || sv[sv.size() - 1] <= 1e-10 * sv[0] || sv.size() < 2) {
    throw InvalidInput("polytope halfspace matrix must have full column rank");
  }
}

RigidPolytope RigidPolytope::regular_polygon(int sides, double radius) {
  if (sides < 3) throw InvalidInput("regular polygon needs at least 3 sides");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidInput("regular polygon radius must be positive");
  }
  Eigen::MatrixXd a(sides, 2);
  Eigen::VectorXd b(sides);
  const double apothem = radius * std::cos(std::numbers::pi / sides);
  for (int i = 0; i < sides; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / sides;
    a(i, 0) = std::cos(phi);
    a(i, 1) = std::sin(phi);
    b[i] = apothem;
  }
  return RigidPolytope(std::move(a), std::move(b));
}

RigidPolytope RigidPolytope::box(double half_x, double half_y) {
  if (!(half_x > 0.0) || !(half_y > 0.0)) throw InvalidInput("box half-widths must be positive");
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, 0, 1, -1, 0, 0, -1;
  Eigen::VectorXd b(4);
  b << half_x, half_y, half_x, half_y;
  return RigidPolytope(std::move(a), std::move(b));
}

StackEval RigidPolytope::evaluate(const Eigen::VectorXd& x, const ParamVector& params) const {
  check_dims(*this, x, params);
  const Eigen::Index q = base_a_.rows();
  const Eigen::Vector2d center(params[0], params[1]);
  const Eigen::Matrix2d rt = rotation(params[2]).transpose();
  const Eigen::Matrix2d drt = rotation_derivative_t(params[2]);
  const Eigen::Vector2d rel = x - center;

  StackEval out;
  out.jac_x = base_a_ * rt;
  out.value = out.jac_x * rel - base_b_;
  out.jac_param.resize(q, 3);
  out.jac_param.leftCols(2) = -out.jac_x;
  const Eigen::MatrixXd a_drt = base_a_ * drt;
  out.jac_param.col(2) = a_drt * rel;
  out.hess_xx.assign(q, Eigen::MatrixXd::Zero(2, 2));
  out.hess_xparam.assign(q, Eigen::MatrixXd::Zero(2, 3));
  for (Eigen::Index k = 0; k < q; ++k) {
    out.hess_xparam[k].col(2) = a_drt.row(k).transpose();
  }
  return out;
}

Eigen::VectorXd RigidPolytope::values(const Eigen::VectorXd& x, const ParamVector& params) const {
  check_dims(*this, x, params);
  const Eigen::Vector2d rel = x - Eigen::Vector2d(params[0], params[1]);
  return base_a_ * (rotation(params[2]).transpose() * rel) - base_b_;
}

Eigen::VectorXd RigidPolytope::reference_point(const ParamVector& params) const {
  const Eigen::Vector2d center(params[0], params[1]);
  if (!base_is_bounded()) return center;
  const auto verts = vertices(ParamVector::rigid_pose(0.0, 0.0, 0.0));
  if (verts.empty()) return center;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& v : verts) mean += v;
  mean /= static_cast<double>(verts.size());
  return center + rotation(params[2]) * mean;
}

bool RigidPolytope::base_is_bounded() const {
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < base_a_.rows(); ++i) {
    if (base_a_.row(i).norm() > 0.0) angles.push_back(std::atan2(base_a_(i, 1), base_a_(i, 0)));
  }
  if (angles.size() < 3) return false;
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
  return max_gap < std::numbers::pi - 1e-12;
}

bool RigidPolytope::is_bounded(const ParamVector&) const { return base_is_bounded(); }

std::pair<Eigen::MatrixXd, Eigen::VectorXd> RigidPolytope::world_halfspaces(
    const ParamVector& pose) const {
  if (pose.size() != 3) throw InvalidInput("rigid polytope pose must have 3 entries");
  const Eigen::MatrixXd a = base_a_ * rotation(pose[2]).transpose();
  const Eigen::VectorXd b = base_b_ + a * Eigen::Vector2d(pose[0], pose[1]);
  return {a, b};
}

std::vector<Eigen::Vector2d> RigidPolytope::vertices(const ParamVector& pose) const {
  const auto [a, b] = world_halfspaces(pose);
  const Eigen::Index q = a.rows();
  std::vector<Eigen::Vector2d> pts;
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = i + 1; j < q; ++j) {
      Eigen::Matrix2d m;
      m.row(0) = a.row(i);
      m.row(1) = a.row(j);
      const double det = m.determinant();
      if (std::abs(det) < 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) continue;
      const Eigen::Vector2d p = m.inverse() * Eigen::Vector2d(b[i], b[j]);
      const double slack = ((a * p - b).array()).maxCoeff();
      if (slack > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) continue;
      const bool dup = std::any_of(pts.begin(), pts.end(),
                                   [&](const Eigen::Vector2d& o) { return (o - p).norm() < 1e-9; });
      if (!dup) pts.push_back(p);
    }
  }
  if (pts.size() < 3) return pts;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& l, const Eigen::Vector2d& r) {
    return std::atan2(l.y() - mean.y(), l.x() - mean.x()) <
           std::atan2(r.y() - mean.y(), r.x() - mean.x());
  });
  return pts;
}

// ---------------------------------------------------------------------------
// FunctionalStack

FunctionalStack::FunctionalStack(Eigen::Index num_constraints, Eigen::Index ambient_dim,
                                 Eigen::Index param_dim, Evaluator evaluator, Reference reference)
    : num_constraints_(num_constraints),
      ambient_dim_(ambient_dim),
      param_dim_(param_dim),
      evaluator_(std::move(evaluator)),
      reference_(std::move(reference)) {
  if (num_constraints_ < 1 || ambient_dim_ < 1 || param_dim_ < 0) {
    throw InvalidInput("functional stack dimensions must be positive");
  }
  if (!evaluator_ || !reference_) throw InvalidInput("functional stack needs both callbacks");
}

StackEval FunctionalStack::evaluate(const Eigen::VectorXd& x, const ParamVector& params) const {
  check_dims(*this, x, params);
  StackEval out = evaluator_(x, params);
  const auto q = num_constraints_;
  const auto n = ambient_dim_;
  const auto m = param_dim_;
  bool ok = out.value.size() == q && out.jac_x.rows() == q && out.jac_x.cols() == n &&
            out.jac_param.rows() == q && out.jac_param.cols() == m &&
            static_cast<Eigen::Index>(out.hess_xx.size()) == q &&
            static_cast<Eigen::Index>(out.hess_xparam.size()) == q;
  for (Eigen::Index k = 0; ok && k < q; ++k) {
    ok = out.hess_xx[k].rows() == n && out.hess_xx[k].cols() == n &&
         out.hess_xparam[k].rows() == n && out.hess_xparam[k].cols() == m;
  }
  if (!ok) throw InvalidInput("functional stack callback returned blocks of the wrong shape");
  return out;
}

Eigen::VectorXd FunctionalStack::reference_point(const ParamVector& params) const {
  Eigen::VectorXd x = reference_(params);
  if (x.size() != ambient_dim_) throw InvalidInput("reference point has the wrong dimension");
  return x;
}

// ---------------------------------------------------------------------------
// SetSpec and evaluation

SetSpec::SetSpec(std::shared_ptr<const ConstraintStack> stack, SmoothMaxParams smoothing)
    : stack_(std::move(stack)), smoothing_(smoothing) {
  if (!stack_) throw InvalidInput("set spec needs a constraint stack");
  smoothing_.validate();
}

double SetSpec::level() const {
  return std::log(static_cast<double>(num_constraints())) / smoothing_.epsilon;
}

SetSpec SetSpec::with_epsilon(double epsilon) const { return SetSpec(stack_, {epsilon}); }

StackEval eval_stack(const SetSpec& set, const Eigen::VectorXd& x, const ParamVector& params) {
  return set.stack().evaluate(x, params);
}

double membership_margin(const SetSpec& set, const Eigen::VectorXd& x, const ParamVector& params) {
  return lse_eps_plus_value(set.stack().values(x, params), set.smoothing()) - set.level();
}

SmoothedConstraint smoothed_constraint(const SetSpec& set, const Eigen::VectorXd& x,
                                       const ParamVector& params) {
  SmoothedConstraint out;
  out.stack = set.stack().evaluate(x, params);
  out.lse = lse_eps_plus(out.stack.value, set.smoothing());
  out.value = out.lse.value - set.level();
  out.gradient = out.stack.jac_x.transpose() * out.lse.gradient;
  out.hessian = out.stack.jac_x.transpose() * out.lse.hessian * out.stack.jac_x;
  if (!set.stack().affine_in_x()) {
    for (Eigen::Index k = 0; k < out.lse.gradient.size(); ++k) {
      out.hessian += out.lse.gradient[k] * out.stack.hess_xx[k];
    }
  }
  return out;
}

namespace detail {

NewtonOutcome minimize_smoothed_stack(const ConstraintStack& stack, const ParamVector& params,
                                      double smoothing, Eigen::VectorXd x, int max_iterations) {
  const SmoothMaxParams sp{smoothing};
  auto objective = [&](const Eigen::VectorXd& p) {
    return lse_eps_plus_value(stack.values(p, params), sp);
  };
  auto derivatives = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    const StackEval se = stack.evaluate(p, params);
    const LseEval le = lse_eps_plus(se.value, sp);
    g = se.jac_x.transpose() * le.gradient;
    h = se.jac_x.transpose() * le.hessian * se.jac_x;
    if (!stack.affine_in_x()) {
      for (Eigen::Index k = 0; k < le.gradient.size(); ++k) h += le.gradient[k] * se.hess_xx[k];
    }
    return le.value;
  };
  return damped_newton(objective, derivatives, std::move(x), max_iterations);
}

}  // namespace detail

Eigen::VectorXd find_interior_point(const SetSpec& set, const ParamVector& params) {
  const ConstraintStack& stack = set.stack();
  Eigen::VectorXd x = stack.reference_point(params);
  if (x.size() != stack.ambient_dim()) throw InvalidInput("reference point has wrong dimension");
  int budget = kInteriorMaxIterations;
  double smoothing = set.epsilon();
  while (budget > 0) {
    const auto res = detail::minimize_smoothed_stack(stack, params, smoothing, x, budget);
    budget -= std::max(res.iterations, 1);
    if (res.x.allFinite()) x = res.x;
    if (x.allFinite() && stack.values(x, params).maxCoeff() < -kInteriorMargin) return x;
    smoothing *= 4.0;
    if (smoothing > 1e12) break;
  }
  throw EmptyInterior("no strictly feasible point found within " +
                      std::to_string(kInteriorMaxIterations) + " Newton iterations");
}

Eigen::VectorXd smoothed_center(const SetSpec& set, const ParamVector& params) {
  const ConstraintStack& stack = set.stack();
  Eigen::VectorXd x0 = stack.reference_point(params);
  const auto res =
      detail::minimize_smoothed_stack(stack, params, set.epsilon(), std::move(x0), kInteriorMaxIterations);
  if (!res.x.allFinite() || !(membership_margin(set, res.x, params) < 0.0)) {
    throw EmptyInterior("smoothed set has no strictly feasible point");
  }
  return res.x;
}

// ---------------------------------------------------------------------------
// Standard conditions

bool StandardConditionsReport::all_passed() const {
  return !samples.empty() &&
         std::all_of(samples.begin(), samples.end(), [](const SampleCheck& s) { return s.passed(); });
}

StandardConditionsReport verify_standard_conditions(const SetSpec& set,
                                                    std::span<const ParamVector> samples,
                                                    unsigned seed) {
  const ConstraintStack& stack = set.stack();
  const Eigen::Index n = stack.ambient_dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  StandardConditionsReport report;
  for (const ParamVector& params : samples) {
    SampleCheck check;
    std::ostringstream detail;
    const Eigen::VectorXd center = stack.reference_point(params);

    check.compact_ok = stack.is_bounded(params);
    if (!check.compact_ok) detail << "unbounded; ";

    // Sample around the reference point at a scale that reaches outside the set.
    double scale = 1.0;
    for (double r = 1e-3; r <= 1e6; r *= 2.0) {
      scale = r;
      if (stack.values(center + r * Eigen::VectorXd::Unit(n, 0), params).maxCoeff() > 0.0) break;
    }
    scale *= 2.0;

    std::vector<Eigen::VectorXd> points{center};
    for (int k = 0; k < 8; ++k) {
      Eigen::VectorXd p(n);
      for (Eigen::Index i = 0; i < n; ++i) p[i] = center[i] + scale * unit(rng);
      points.push_back(p);
    }
    check.rank = n;
    for (const auto& p : points) {
      const Eigen::MatrixXd jac = stack.evaluate(p, params).jac_x;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
      const auto& sv = svd.singularValues();
      Eigen::Index rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > 1e-10 * sv[0]) ++rank;
      }
      check.rank = std::min(check.rank, rank);
    }
    check.rank_ok = check.rank == n;
    if (!check.rank_ok) detail << "dF/dx rank " << check.rank << " < " << n << "; ";

    check.convexity_ok = true;
    for (int k = 0; k < 64 && check.convexity_ok; ++k) {
      Eigen::VectorXd a(n), b(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        a[i] = center[i] + scale * unit(rng);
        b[i] = center[i] + scale * unit(rng);
      }
      const Eigen::VectorXd fa = stack.values(a, params);
      const Eigen::VectorXd fb = stack.values(b, params);
      const Eigen::VectorXd fm = stack.values(0.5 * (a + b), params);
      for (Eigen::Index j = 0; j < fm.size(); ++j) {
        const double chord = 0.5 * (fa[j] + fb[j]);
        if (fm[j] > chord + 1e-9 * (1.0 + std::abs(chord))) {
          check.convexity_ok = false;
          detail << "midpoint convexity fails for constraint " << j << "; ";
          break;
        }
      }
    }
    check.detail = detail.str();
    report.samples.push_back(std::move(check));
  }
  return report;
}

}  // namespace lsecbf
