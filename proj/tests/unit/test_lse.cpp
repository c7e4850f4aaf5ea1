#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lsecbf/errors.hpp"
#include "lsecbf/lse.hpp"
#include "lsecbf/oracles.hpp"
#include "support.hpp"

using namespace lsecbf;
using testing::vec;

// Reference values below were computed with mpmath at 30 digits.

TEST_CASE("lse matches direct evaluation") {
  CHECK(lse(vec({0.0})) == doctest::Approx(0.0));
  CHECK(lse(vec({0.0, 0.0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(lse(vec({1.0, 2.0})) == doctest::Approx(2.313261687518222834).epsilon(1e-15));
}

TEST_CASE("lse does not overflow near 700") {
  const double v = lse(vec({700.0, 699.0, -700.0}));
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(700.0 + std::log1p(std::exp(-1.0))).epsilon(1e-15));
}

TEST_CASE("lse rejects empty and NaN input") {
  CHECK_THROWS_AS(lse(Eigen::VectorXd()), InvalidInput);
  CHECK_THROWS_AS(lse(vec({1.0, std::nan("")})), InvalidInput);
  CHECK_THROWS_AS(lse_eps_plus(Eigen::VectorXd(), {1.0}), InvalidInput);
  CHECK_THROWS_AS(lse_eps_plus(vec({std::nan("")}), {1.0}), InvalidInput);
  CHECK_THROWS_AS(lse_eps_plus(vec({0.0}), {0.0}), InvalidInput);
  CHECK_THROWS_AS(lse_eps_plus(vec({0.0}), {-1.0}), InvalidInput);
}

TEST_CASE("lse_eps_plus examples") {
  const LseEval a = lse_eps_plus(vec({0.0}), {1.0});
  CHECK(a.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(a.gradient[0] == doctest::Approx(0.5));

  const LseEval b = lse_eps_plus(vec({0.0, 0.0}), {1.0});
  CHECK(b.gradient[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b.gradient[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const LseEval c = lse_eps_plus(vec({-1.0, -1.0, -1.0, -1.0}), {1.0});
  CHECK(c.value == doctest::Approx(0.9048324415544480250).epsilon(1e-15));
}

TEST_CASE("lse_eps_plus value-only entry point agrees") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd x(1 + k % 8);
    for (auto& v : x) v = u(rng);
    const double eps = 0.5 + k % 40;
    CHECK(lse_eps_plus_value(x, {eps}) == lse_eps_plus(x, {eps}).value);
  }
}

TEST_CASE("hessian_min_eigenvalue examples") {
  CHECK(hessian_min_eigenvalue(lse_eps_plus(vec({0.0}), {1.0})) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(hessian_min_eigenvalue(Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(1.0));

  const LseEval e = lse_eps_plus(vec({5.0, -5.0}), {1.0});
  const double structured = hessian_min_eigenvalue(e);
  CHECK(structured == doctest::Approx(4.479021367796004694e-5).epsilon(1e-12));
  // characteristic polynomial of the 2x2 Hessian
  const Eigen::MatrixXd& h = e.hessian;
  const double tr = h.trace(), det = h.determinant();
  const double smallest = 2.0 * det / (tr + std::sqrt(tr * tr - 4.0 * det));
  CHECK(structured == doctest::Approx(smallest).epsilon(1e-9));
  CHECK(hessian_min_eigenvalue(e.hessian) == doctest::Approx(smallest).epsilon(1e-9));
}

TEST_CASE("hessian_min_eigenvalue rejects asymmetric input") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 1) = 1e-6;
  CHECK_THROWS_AS(hessian_min_eigenvalue(m), InvalidInput);
  m(0, 1) = 1e-14;
  CHECK_NOTHROW(hessian_min_eigenvalue(m));
}

TEST_CASE("structured eigenvalue agrees with a dense eigensolve when well conditioned") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 300; ++k) {
    Eigen::VectorXd x(1 + k % 8);
    for (auto& v : x) v = u(rng);
    const LseEval e = lse_eps_plus(x, {0.5 + (k % 5)});
    CHECK(hessian_min_eigenvalue(e) == doctest::Approx(hessian_min_eigenvalue(e.hessian)).epsilon(1e-8));
  }
}

TEST_CASE("sandwich bound with log(q+1)") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const double eps_grid[] = {0.5, 1.0, 5.0, 20.0};
  int violations = 0;
  for (int k = 0; k < 4000; ++k) {
    const int q = 1 + static_cast<int>(rng() % 8);
    Eigen::VectorXd x(q);
    for (auto& v : x) v = u(rng);
    const double eps = eps_grid[rng() % 4];
    const LseEval e = lse_eps_plus(x, {eps});
    const double m = std::max(0.0, x.maxCoeff());
    const bool lower = e.excess > 0.0 && e.value >= m;
    const bool upper = e.excess <= std::log(q + 1.0) / eps;
    if (!lower || !upper) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("the log(q) upper bound fails whenever every entry is zero") {
  for (int q = 1; q <= 8; ++q) {
    for (double eps : {0.5, 1.0, 20.0}) {
      const LseEval e = lse_eps_plus(Eigen::VectorXd::Zero(q), {eps});
      CHECK(e.value > std::log(static_cast<double>(q)) / eps);
      CHECK(e.value == doctest::Approx(std::log(q + 1.0) / eps).epsilon(1e-14));
    }
  }
}

TEST_CASE("gradient entries are positive and sum below one") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd x(1 + k % 8);
    for (auto& v : x) v = u(rng);
    const LseEval e = lse_eps_plus(x, {k % 2 ? 1.0 : 20.0});
    const double m = std::max(0.0, x.maxCoeff());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (e.epsilon * (x[i] - m) > -700.0) CHECK(e.gradient[i] > 0.0);
    }
    CHECK(e.zero_weight > 0.0);
    // the sum only drops visibly below 1 while the zero weight exceeds an ulp
    if (e.zero_weight > 1e-15) CHECK(e.gradient.sum() < 1.0);
    CHECK(e.gradient.sum() <= 1.0 + 8.0 * std::numeric_limits<double>::epsilon());
    CHECK(e.gradient.sum() + e.zero_weight == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("Hessian is positive definite on random draws") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const double eps_grid[] = {0.5, 1.0, 5.0, 20.0};
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd x(1 + rng() % 8);
    for (auto& v : x) v = u(rng);
    CHECK(hessian_min_eigenvalue(lse_eps_plus(x, {eps_grid[rng() % 4]})) > 0.0);
  }
}

TEST_CASE("analytic derivatives match central differences") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd x(1 + k % 6);
    for (auto& v : x) v = u(rng);
    const SmoothMaxParams p{0.5 + (k % 4) * 2.0};
    const LseEval e = lse_eps_plus(x, p);
    auto value = [&](const Eigen::VectorXd& y) { return lse_eps_plus(y, p).value; };
    CHECK(oracles::compare(oracles::finite_difference_gradient(value, x, 1e-6), e.gradient, 1e-5, 1e-8).pass);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      auto gi = [&](const Eigen::VectorXd& y) { return lse_eps_plus(y, p).gradient[i]; };
      CHECK(oracles::compare(oracles::finite_difference_gradient(gi, x, 1e-6), e.hessian.row(i).transpose(), 1e-5, 1e-8)
                .pass);
    }
  }
}

TEST_CASE("approximation gap shrinks as epsilon grows") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x(1 + k % 8);
    for (auto& v : x) v = u(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps = 1.0; eps <= 256.0; eps *= 2.0) {
      const double gap = lse_eps_plus(x, {eps}).excess;
      CHECK(gap <= prev);
      prev = gap;
    }
  }
}
