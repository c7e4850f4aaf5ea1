#include "lsecbf/cbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsecbf/errors.hpp"

namespace lsecbf {

double ClassKFunction::operator()(double h) const {
  switch (kind) {
    case Kind::Linear: return gamma * h;
    case Kind::Cubic: return gamma * h * h * h;
  }
  return 0.0;
}

void ClassKFunction::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("class-K gain must be positive and finite");
}

std::string_view to_string(ClassKFunction::Kind kind) {
  return kind == ClassKFunction::Kind::Linear ? "linear" : "cubic";
}

BarrierConfig BarrierConfig::from_margin_distance(double r, ClassKFunction alpha) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("margin distance must be nonnegative");
  return {0.5 * r * r, alpha};
}

void BarrierConfig::validate() const {
  if (!(R >= 0.0) || !std::isfinite(R)) throw InvalidInput("barrier margin R must be nonnegative");
  alpha.validate();
}

double barrier_value(const DistanceSolution& s, const BarrierConfig& cfg) {
  switch (s.status) {
    case SolveStatus::Optimal: return s.value - cfg.R;
    case SolveStatus::Intersecting: return -cfg.R;
    default:
      throw InvalidInput("barrier value undefined for distance status " + std::string(to_string(s.status)));
  }
}

std::vector<SafetyConstraintRow> assemble_rows(std::span<const ObstacleTerm> terms,
                                               const Eigen::Ref<const Eigen::VectorXd>& f,
                                               const Eigen::Ref<const Eigen::MatrixXd>& g,
                                               const BarrierConfig& cfg) {
  cfg.validate();
  if (g.rows() != f.size()) throw InvalidInput("drift and input matrix row counts differ");
  std::vector<SafetyConstraintRow> rows;
  rows.reserve(terms.size());
  for (const ObstacleTerm& t : terms) {
    if (t.dh_dlambda_ego.size() != f.size()) {
      std::ostringstream os;
      os << "obstacle " << t.obstacle_id << ": ego gradient has length " << t.dh_dlambda_ego.size()
         << ", dynamics state has " << f.size();
      throw InvalidInput(os.str());
    }
    if (t.dh_dlambda_obstacle.size() != t.obstacle_rate.size()) {
      std::ostringstream os;
      os << "obstacle " << t.obstacle_id << ": obstacle gradient and rate lengths differ";
      throw InvalidInput(os.str());
    }
    SafetyConstraintRow r;
    r.obstacle_id = t.obstacle_id;
    r.h_value = t.h;
    r.coeff = g.transpose() * t.dh_dlambda_ego;
    r.offset = t.dh_dlambda_ego.dot(f) + t.dh_dlambda_obstacle.dot(t.obstacle_rate) + cfg.alpha(t.h);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string_view to_string(FilterStatus s) { return s == FilterStatus::Optimal ? "Optimal" : "Infeasible"; }

FilteredInput solve_filter_qp(const Eigen::Ref<const Eigen::VectorXd>& u_nom,
                              std::span<const SafetyConstraintRow> rows) {
  const Eigen::Index p = u_nom.size();
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  double scale = 1.0;
  for (const auto& r : rows) {
    if (r.coeff.size() != p) throw InvalidInput("filter row length differs from input dimension");
    if (!r.coeff.allFinite() || !std::isfinite(r.offset)) throw InvalidInput("filter row is not finite");
    scale = std::max(scale, r.coeff.lpNorm<Eigen::Infinity>());
  }
  if (!u_nom.allFinite()) throw InvalidInput("nominal input is not finite");

  const double feas_tol = 1e-12 * scale * (1.0 + u_nom.lpNorm<Eigen::Infinity>());
  const double zero_tol = 1e-13 * scale;

  Eigen::VectorXd u = u_nom;
  std::vector<Eigen::Index> active;
  std::vector<double> lambda;

  auto slack = [&](Eigen::Index i) { return rows[i].coeff.dot(u) + rows[i].offset; };

  auto result = [&](FilterStatus st) {
    FilteredInput out;
    out.u = u;
    out.status = st;
    for (std::size_t k = 0; k < active.size(); ++k) {
      out.active_rows.push_back(rows[active[k]].obstacle_id);
      out.multipliers.push_back(lambda[k]);
    }
    return out;
  };

  const int max_outer = static_cast<int>(4 * (nrows + p) + 20);
  for (int outer = 0; outer < max_outer; ++outer) {
    // most violated inactive row
    Eigen::Index q = -1;
    double worst = -feas_tol;
    for (Eigen::Index i = 0; i < nrows; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double s = slack(i);
      if (s < worst) {
        worst = s;
        q = i;
      }
    }
    if (q < 0) {
      for (Eigen::Index i = 0; i < nrows; ++i) {
        if (slack(i) < -1e-9 * scale * (1.0 + u.lpNorm<Eigen::Infinity>())) throw NumericalFailure("filter QP lost feasibility of an active row");
      }
      return result(FilterStatus::Optimal);
    }

    double lambda_q = 0.0;
    for (int inner = 0; inner <= static_cast<int>(nrows + p); ++inner) {
      const Eigen::VectorXd& nq = rows[q].coeff;
      Eigen::VectorXd z = nq;
      Eigen::VectorXd r;
      if (!active.empty()) {
        Eigen::MatrixXd N(p, static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) N.col(static_cast<Eigen::Index>(k)) = rows[active[k]].coeff;
        r = N.colPivHouseholderQr().solve(nq);
        z = nq - N * r;
      }
      // partial step bounded by the first active multiplier to reach zero
      double t1 = std::numeric_limits<double>::infinity();
      std::size_t drop = 0;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (r[static_cast<Eigen::Index>(k)] > zero_tol) {
          const double tk = lambda[k] / r[static_cast<Eigen::Index>(k)];
          if (tk < t1) {
            t1 = tk;
            drop = k;
          }
        }
      }
      const double zn = z.dot(nq);
      const bool primal_step =
          static_cast<Eigen::Index>(active.size()) < p && z.norm() > 1e-9 * nq.norm();
      const double t2 = primal_step ? -slack(q) / zn : std::numeric_limits<double>::infinity();

      if (!primal_step && std::isinf(t1)) return result(FilterStatus::Infeasible);
      const double t = std::min(t1, t2);
      if (primal_step) u += t * z;
      for (std::size_t k = 0; k < active.size(); ++k) lambda[k] -= t * r[static_cast<Eigen::Index>(k)];
      lambda_q += t;

      if (t == t2) {
        active.push_back(q);
        lambda.push_back(lambda_q);
        break;
      }
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
      lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(drop));
      if (slack(q) >= -feas_tol) {
        // the row became satisfied through the dual step alone
        if (lambda_q > 0.0) {
          active.push_back(q);
          lambda.push_back(lambda_q);
        }
        break;
      }
    }
  }
  throw NumericalFailure("filter QP did not terminate");
}

}  // namespace lsecbf
