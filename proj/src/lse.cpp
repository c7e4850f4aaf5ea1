#include "lsecbf/lse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsecbf/errors.hpp"

namespace lsecbf {
namespace {

void check_input(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) {
    throw InvalidInput("log-sum-exp of an empty vector");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i])) {
      throw InvalidInput("log-sum-exp input has NaN at index " + std::to_string(i));
    }
    if (!std::isfinite(x[i])) {
      throw InvalidInput("log-sum-exp input is not finite at index " + std::to_string(i));
    }
  }
}

// Shared part of lse_eps_plus: weights of the nonzero terms, and the excess.
struct Weights {
  double top = 0.0;  // max(0, max x)
  double excess = 0.0;
  double zero_weight = 0.0;
  Eigen::VectorXd w;
};

Weights smoothed_weights(const Eigen::Ref<const Eigen::VectorXd>& x, double eps) {
  Weights out;
  Eigen::Index arg = -1;  // -1 is the implicit zero term
  out.top = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > out.top) {
      out.top = x[i];
      arg = i;
    }
  }
  // Terms are exp(eps (x_i - top)); the argmax term is exactly 1 and is kept
  // out of `rest` so log1p keeps full relative precision.
  out.w.resize(x.size());
  double rest = (arg == -1) ? 0.0 : std::exp(-eps * out.top);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double term = (i == arg) ? 1.0 : std::exp(eps * (x[i] - out.top));
    out.w[i] = term;
    if (i != arg) rest += term;
  }
  const double total = 1.0 + rest;
  out.w /= total;
  out.zero_weight = ((arg == -1) ? 1.0 : std::exp(-eps * out.top)) / total;
  out.excess = std::log1p(rest) / eps;
  return out;
}

}  // namespace

void SmoothMaxParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInput("epsilon must be finite and > 0, got " + std::to_string(epsilon));
  }
}

double lse(const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_input(x);
  const double m = x.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += std::exp(x[i] - m);
  return m + std::log(sum);
}

LseEval lse_eps_plus(const Eigen::Ref<const Eigen::VectorXd>& x, SmoothMaxParams params) {
  check_input(x);
  params.validate();
  const double eps = params.epsilon;
  Weights sw = smoothed_weights(x, eps);

  LseEval out;
  out.excess = sw.excess;
  out.zero_weight = sw.zero_weight;
  out.epsilon = eps;
  out.value = sw.top + sw.excess;
  out.hessian = eps * (Eigen::MatrixXd(sw.w.asDiagonal()) - sw.w * sw.w.transpose());
  out.gradient = std::move(sw.w);
  return out;
}

double lse_eps_plus_value(const Eigen::Ref<const Eigen::VectorXd>& x, SmoothMaxParams params) {
  check_input(x);
  params.validate();
  const Weights sw = smoothed_weights(x, params.epsilon);
  return sw.top + sw.excess;
}

double hessian_min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& hessian) {
  if (hessian.rows() != hessian.cols() || hessian.rows() == 0) {
    throw InvalidInput("hessian must be a nonempty square matrix");
  }
  if (!hessian.allFinite()) {
    throw InvalidInput("hessian has non-finite entries");
  }
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  const double asym = (hessian - hessian.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw InvalidInput("hessian is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hessian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double hessian_min_eigenvalue(const LseEval& eval) {
  const Eigen::VectorXd& w = eval.gradient;
  if (w.size() == 0 || !(eval.epsilon > 0.0)) return hessian_min_eigenvalue(eval.hessian);
  const double w_min = w.minCoeff();
  const double w0 = eval.zero_weight;
  if (!(w_min > 0.0) || !(w0 > 0.0)) return 0.0;
  const double n = static_cast<double>(w.size());
  // secular function, decreasing on (0, w_min); both terms are positive
  auto f = [&](double mu) { return w0 - mu * (w.array() / (w.array() - mu)).sum(); };
  double lo = 0.5 * std::min(w0 / (2.0 * n), 0.5 * w_min);
  double hi = std::min(w0 / n, w_min);
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid >= w_min || f(mid) < 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return eval.epsilon * 0.5 * (lo + hi);
}

}  // namespace lsecbf
