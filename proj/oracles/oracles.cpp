#include "lsecbf/oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "lsecbf/errors.hpp"

namespace lsecbf::oracles {
namespace {

// World-frame halfspaces of a posed body polytope.
void world(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::Vector3d& pose, Eigen::MatrixXd& aw,
           Eigen::VectorXd& bw) {
  const double c = std::cos(pose[2]), s = std::sin(pose[2]);
  Eigen::Matrix2d rot_t;
  rot_t << c, s, -s, c;
  aw = a * rot_t;
  bw = b + aw * pose.head<2>();
}

template <typename Visit>
void for_each_subset(int n, int max_size, Visit&& visit) {
  std::vector<int> idx;
  std::function<void(int)> rec = [&](int start) {
    visit(idx);
    if (static_cast<int>(idx.size()) == max_size) return;
    for (int i = start; i < n; ++i) {
      idx.push_back(i);
      rec(i + 1);
      idx.pop_back();
    }
  };
  rec(0);
}

}  // namespace

bool polytope_is_bounded(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.cols();
  if (a.rows() < n + 1) return false;
  bool bounded = true;
  // extreme rays of the recession cone lie on n-1 of the facet hyperplanes
  for_each_subset(static_cast<int>(a.rows()), static_cast<int>(n - 1), [&](const std::vector<int>& s) {
    if (!bounded || static_cast<Eigen::Index>(s.size()) != n - 1) return;
    Eigen::MatrixXd m(n - 1, n);
    for (std::size_t k = 0; k < s.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = a.row(s[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() != 1) return;
    const Eigen::VectorXd d = ker.col(0).normalized();
    for (double sign : {1.0, -1.0}) {
      if (((sign * a * d).array() <= 1e-12).all()) bounded = false;
    }
  });
  return bounded;
}

Eigen::VectorXd project_onto_polytope(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& p) {
  const Eigen::Index n = a.cols();
  const double tol = 1e-11 * (1.0 + b.cwiseAbs().maxCoeff() + p.norm());
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for_each_subset(static_cast<int>(a.rows()), static_cast<int>(n), [&](const std::vector<int>& s) {
    Eigen::VectorXd x = p;
    Eigen::VectorXd lam;
    if (!s.empty()) {
      const auto m = static_cast<Eigen::Index>(s.size());
      Eigen::MatrixXd as(m, n);
      Eigen::VectorXd bs(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        as.row(k) = a.row(s[static_cast<std::size_t>(k)]);
        bs[k] = b[s[static_cast<std::size_t>(k)]];
      }
      const Eigen::MatrixXd gram = as * as.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (lu.rank() < m) return;
      lam = lu.solve(as * p - bs);
      if ((lam.array() < -tol).any()) return;
      x = p - as.transpose() * lam;
    }
    if (((a * x - b).array() > tol).any()) return;
    const double dist = (x - p).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  });
  if (best.size() == 0) throw InvalidInput("projection found no feasible active set");
  return best;
}

double exact_polytope_distance(const Eigen::MatrixXd& a1, const Eigen::VectorXd& b1, const Eigen::Vector3d& pose1,
                               const Eigen::MatrixXd& a2, const Eigen::VectorXd& b2, const Eigen::Vector3d& pose2) {
  if (a1.cols() != 2 || a2.cols() != 2) throw InvalidInput("exact distance oracle is 2D");
  if (a1.rows() > 12 || a2.rows() > 12) throw InvalidInput("exact distance oracle supports at most 12 facets");
  if (!polytope_is_bounded(a1) || !polytope_is_bounded(a2)) throw InvalidInput("polytope is not compact");
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd c1, c2;
  world(a1, b1, pose1, w1, c1);
  world(a2, b2, pose2, w2, c2);

  Eigen::VectorXd y = project_onto_polytope(w2, c2, pose1.head<2>());
  Eigen::VectorXd x = project_onto_polytope(w1, c1, y);
  double prev = (x - y).norm();
  for (int it = 0; it < 200000; ++it) {
    y = project_onto_polytope(w2, c2, x);
    x = project_onto_polytope(w1, c1, y);
    const double d = (x - y).norm();
    if (d < 1e-12) return 0.0;
    if (prev - d <= 1e-10 * 1e-3 * (1.0 + d) && it > 2) {
      prev = d;
      break;
    }
    prev = d;
  }
  return prev;
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                                           const Eigen::VectorXd& theta, double step) {
  if (!(step > 0.0)) throw InvalidInput("finite difference step must be positive");
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[k] += step;
    tm[k] -= step;
    g[k] = (fn(tp) - fn(tm)) / (2.0 * step);
  }
  return g;
}

FilteredInput exhaustive_qp(const Eigen::VectorXd& u_nom, std::span<const SafetyConstraintRow> rows) {
  const auto j = static_cast<int>(rows.size());
  if (j > 12) throw InvalidInput("exhaustive QP supports at most 12 rows");
  const Eigen::Index p = u_nom.size();
  const double tol = 1e-10;
  FilteredInput best;
  best.status = FilterStatus::Infeasible;
  best.u = Eigen::VectorXd::Zero(p);
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << j); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < j; ++i) {
      if (mask & (1u << i)) s.push_back(i);
    }
    Eigen::VectorXd u = u_nom;
    Eigen::VectorXd lam;
    if (!s.empty()) {
      const auto m = static_cast<Eigen::Index>(s.size());
      Eigen::MatrixXd c(m, p);
      Eigen::VectorXd d(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        c.row(k) = rows[static_cast<std::size_t>(s[static_cast<std::size_t>(k)])].coeff.transpose();
        d[k] = rows[static_cast<std::size_t>(s[static_cast<std::size_t>(k)])].offset;
      }
      // active rows hold with equality: c (u_nom + c^T lam) + d = 0
      const Eigen::MatrixXd gram = c * c.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (lu.rank() < m) continue;
      lam = lu.solve(-(c * u_nom + d));
      if ((lam.array() < -tol).any()) continue;
      u = u_nom + c.transpose() * lam;
    }
    // rounding in the slack grows with |u|
    const double feas_tol = 1e-9 * (1.0 + u.lpNorm<Eigen::Infinity>());
    bool feasible = true;
    for (const auto& r : rows) feasible = feasible && (r.coeff.dot(u) + r.offset >= -feas_tol);
    if (!feasible) continue;
    const double obj = (u - u_nom).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best.u = u;
      best.status = FilterStatus::Optimal;
      best.active_rows.clear();
      best.multipliers.clear();
      for (std::size_t k = 0; k < s.size(); ++k) {
        best.active_rows.push_back(rows[static_cast<std::size_t>(s[k])].obstacle_id);
        best.multipliers.push_back(lam[static_cast<Eigen::Index>(k)]);
      }
    }
  }
  return best;
}

std::string OracleReport::summary() const {
  std::ostringstream os;
  os << (pass ? "pass" : "FAIL") << " abs_err=" << abs_error << " rel_err=" << rel_error << " (rel_tol " << rel_tol
     << ", abs_floor " << abs_floor << ")";
  return os.str();
}

OracleReport compare(const Eigen::VectorXd& reference, const Eigen::VectorXd& production, double rel_tol,
                     double abs_floor) {
  if (reference.size() != production.size()) throw InvalidInput("oracle comparison of vectors with different sizes");
  OracleReport r{reference, production, 0.0, 0.0, rel_tol, abs_floor, true};
  for (Eigen::Index k = 0; k < reference.size(); ++k) {
    const double diff = std::abs(production[k] - reference[k]);
    const double mag = std::abs(reference[k]);
    r.abs_error = std::max(r.abs_error, diff);
    if (mag * rel_tol > abs_floor) r.rel_error = std::max(r.rel_error, diff / mag);
    if (!(diff <= std::max(rel_tol * mag, abs_floor))) r.pass = false;
  }
  return r;
}

}  // namespace lsecbf::oracles
