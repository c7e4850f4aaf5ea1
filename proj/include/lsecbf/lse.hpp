#pragma once

#include <Eigen/Dense>

namespace lsecbf {

/// Tightness parameter of the smoothed maximum. Larger values approximate
/// max(0, x) more closely.
struct SmoothMaxParams {
  double epsilon = 1.0;

  /// Throws InvalidInput unless epsilon is finite and positive.
  void validate() const;
};

/// Value and derivatives of LSE_eps^+(x) = (1/eps) log(1 + sum_i exp(eps x_i)).
struct LseEval {
  double value = 0.0;
  /// value - max(0, max_i x_i), accumulated without cancellation so that it
  /// stays strictly positive even when it is below one ulp of `value`.
  double excess = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  /// Weight of the implicit zero term, 1 - sum(gradient) without cancellation.
  double zero_weight = 0.0;
  double epsilon = 0.0;
};

/// log(sum_i exp(x_i)) with max-shift stabilization.
double lse(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Smoothed positive part of the maximum, including the implicit zero term.
/// Gradient entries are exp(eps x_i) / (1 + sum_j exp(eps x_j)); the Hessian is
/// eps (diag(w) - w w^T).
LseEval lse_eps_plus(const Eigen::Ref<const Eigen::VectorXd>& x, SmoothMaxParams params);

/// Value only; skips the Hessian.
double lse_eps_plus_value(const Eigen::Ref<const Eigen::VectorXd>& x, SmoothMaxParams params);

/// Smallest eigenvalue of a symmetric matrix. Throws InvalidInput when the
/// matrix is not symmetric to 1e-12 (relative to its largest entry, floor 1).
double hessian_min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& hessian);
/// Uses the diagonal-minus-rank-one structure: the smallest eigenvalue is eps
/// times the root in (0, min w) of w_0 = mu sum_i w_i / (w_i - mu), found by
/// bisection to full relative precision. A dense eigensolve loses it once the
/// weights spread over more than ~16 decades. Returns 0 when a weight underflowed.
double hessian_min_eigenvalue(const LseEval& eval);

}  // namespace lsecbf
