#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hbm/avg_hessian.hpp"
#include "hbm/problems.hpp"

using namespace hbm;

namespace {

// Central differences, the independent oracle for gradients and Hessians.
Vec fd_grad(const Problem& p, const Vec& w, double h = 1e-6) {
  Vec g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Vec a = w, b = w;
    a(i) += h;
    b(i) -= h;
    g(i) = (eval(p, a) - eval(p, b)) / (2 * h);
  }
  return g;
}

Mat fd_hess(const Problem& p, const Vec& w, double h = 1e-5) {
  Mat H(w.size(), w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Vec a = w, b = w;
    a(i) += h;
    b(i) -= h;
    H.col(i) = (grad(p, a) - grad(p, b)) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

Vec uniform(std::mt19937_64& rng, Eigen::Index d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = u(rng);
  return v;
}

struct Case {
  Problem p;
  double lo, hi;
};

std::vector<Case> all_cases() {
  Mat M(2, 2);
  M << 6, 1, 1, 2;
  return {
      {make_quadratic(M, vec({1.0, -2.0})), -5, 5},
      {make_sin2(2.0), -10, 10},
      {make_sin2(4.0), -10, 10},
      {make_diag_net(2, vec({12, 6, 4, 3}), std::sqrt(24.0), 0.01), 0.05, 3.0},
      {make_diag_net(3, vec({1.0, 2.0}), 2.0, 0.1), 0.2, 1.8},
      {make_diag_net(2, vec({1.0, 2.0}), 2.0, 0.1, -1), -1.8, -0.2},
  };
}

} // namespace

TEST(Eval, ReferenceValues) {
  EXPECT_DOUBLE_EQ(eval(make_sin2(4.0), vec({0.0})), 0.0);
  EXPECT_DOUBLE_EQ(eval(make_diag_net(2, vec({1.0}), 2.0, 0.5), vec({1.0})), 0.0);
  const double s = std::sin(-5.0);
  EXPECT_NEAR(eval(make_sin2(4.0), vec({-5.0})), 25.0 + 4.0 * s * s, 1e-12);
  EXPECT_NEAR(eval(make_sin2(4.0), vec({-5.0})), 28.678, 1e-3);
}

TEST(Grad, ReferenceValues) {
  EXPECT_NEAR(grad(make_sin2(2.0), vec({M_PI / 2}))(0), 3.141593, 1e-6);
  EXPECT_NEAR(grad(make_diag_net(2, vec({1.0}), 2.0, 0.5), vec({2.0}))(0), 6.0, 1e-12);
}

TEST(Hess, ReferenceValues) {
  EXPECT_NEAR(hess(make_sin2(2.0), vec({0.0}))(0, 0), 6.0, 1e-14);
  const SymMat H = hess(make_diag_net(2, vec({1.0, 1.0}), 2.0, 0.5), vec({1.0, 1.0}));
  EXPECT_LE((H.mat() - Mat(vec({2.0, 2.0}).asDiagonal())).norm(), 1e-14);
  Mat M(2, 2);
  M << 3, 1, 1, 2;
  const Problem q = make_quadratic(M);
  EXPECT_EQ(hess(q, vec({7.0, -3.0})).mat(), M);
}

TEST(Derivatives, MatchFiniteDifferencesAtRandomPoints) {
  std::mt19937_64 rng(21);
  for (const Case& c : all_cases()) {
    for (int k = 0; k < 100; ++k) {
      const Vec w = uniform(rng, c.p.dim(), c.lo, c.hi);
      EXPECT_LE((grad(c.p, w) - fd_grad(c.p, w)).cwiseAbs().maxCoeff(), 1e-5) << c.p.name();
      EXPECT_LE((hess(c.p, w).mat() - fd_hess(c.p, w)).cwiseAbs().maxCoeff(), 1e-4) << c.p.name();
    }
  }
}

TEST(Derivatives, GradientVanishesAtOptimum) {
  for (const Case& c : all_cases()) EXPECT_LE(grad(c.p, c.p.optimum()).norm(), 1e-10) << c.p.name();
}

TEST(Derivatives, DimensionMismatchThrows) {
  const Problem p = make_sin2(2.0);
  EXPECT_THROW(eval(p, vec({1.0, 2.0})), InvalidInput);
  EXPECT_THROW(grad(p, Vec()), InvalidInput);
  EXPECT_THROW(hess(p, vec({1.0, 2.0})), InvalidInput);
}

TEST(Sin2, ConstantsAndNonConvexity) {
  for (double alpha : {1.5, 2.0, 3.0, 4.0, 4.34}) {
    const Problem p = make_sin2(alpha);
    EXPECT_DOUBLE_EQ(p.L(), 2 + 2 * alpha);
    EXPECT_DOUBLE_EQ(p.L_H(), 4 * alpha);
    const double ls = 2 - 0.46 * alpha;
    EXPECT_NEAR(*p.lambda_star(), ls, 1e-15);
    EXPECT_NEAR(p.mu(), ls * ls / (2 + 2 * alpha), 1e-15);
    double hmin = 1e300;
    for (int k = -500; k <= 500; ++k) hmin = std::min(hmin, hess(p, vec({0.01 * k}))(0, 0));
    EXPECT_LT(hmin, 0.0) << alpha;
  }
}

TEST(Sin2, GlobalPlHoldsOnGrid) {
  for (double alpha : {1.5, 2.0, 3.0, 4.0, 4.34}) {
    const Problem p = make_sin2(alpha);
    for (int k = -1000; k <= 1000; ++k) {
      const Vec w = vec({0.01 * k});
      const double g = grad(p, w)(0);
      EXPECT_GE(g * g, 2 * p.mu() * eval(p, w) - 1e-12) << "alpha " << alpha << " w " << w(0);
    }
  }
}

TEST(Sin2, SeriesNearZero) {
  EXPECT_EQ(sin2w_over_w(0.0), 2.0);
  EXPECT_NEAR(sin2w_over_w(1e-9), 2.0, 1e-15);
  EXPECT_NEAR(sin2w_over_w(1e-3), std::sin(2e-3) / 1e-3, 1e-15);
  EXPECT_NEAR(sin2w_over_w(1.0), std::sin(2.0), 1e-15);
}

TEST(Sin2, PointwiseMuDominatesGlobal) {
  for (double alpha : {2.0, 4.0})
    for (int k = -100; k <= 100; ++k)
      EXPECT_GE(sin2_pointwise_mu(alpha, 0.1 * k), make_sin2(alpha).mu() - 1e-15);
}

TEST(Sin2, RejectsAlphaOutsideRange) {
  EXPECT_THROW(make_sin2(0.0), ParameterError);
  EXPECT_THROW(make_sin2(5.0), ParameterError);
}

TEST(DiagNet, PlConstantHoldsAtRandomPoints) {
  std::mt19937_64 rng(22);
  const Problem p = make_diag_net(2, vec({1.0, 2.0, 0.5}), 2.0, 0.1);
  for (int k = 0; k < 1000; ++k) {
    const Vec u = uniform(rng, 3, 1e-3, 2.0);
    const Vec g = grad(p, u);
    const double mu = 2 * u.minCoeff() * u.minCoeff();
    EXPECT_GE(g.squaredNorm(), 2 * mu * eval(p, u) * (1 - 1e-12));
  }
}

TEST(DiagNet, ConstantsForNTwo) {
  const double R = std::sqrt(2.0);
  const Problem p = make_diag_net(2, vec({1.0}), R, 0.5);
  EXPECT_NEAR(p.L(), 3 * R * R, 1e-14);
  EXPECT_NEAR(p.L_H(), 6 * R, 1e-14);
  EXPECT_NEAR(p.mu(), 2 * 0.25, 1e-15);
  EXPECT_EQ(p.optimum(), vec({1.0}));
  EXPECT_EQ(make_diag_net(2, vec({4.0}), 3.0, 0.5, -1).optimum(), vec({-2.0}));
}

TEST(DiagNet, BadArguments) {
  EXPECT_THROW(make_diag_net(1, vec({1.0}), 2.0, 0.5), ParameterError);
  EXPECT_THROW(make_diag_net(2, vec({-1.0}), 2.0, 0.5), ParameterError);
  EXPECT_THROW(make_diag_net(3, vec({1.0}), 2.0, 0.5, -1), ParameterError);
  EXPECT_THROW(make_diag_net(2, vec({4.0}), 1.0, 0.5), ParameterError);
}

TEST(Quadratic, RequiresPositiveDefinite) {
  EXPECT_THROW(make_quadratic(vec({1.0, 0.0}).asDiagonal()), Error);
  EXPECT_THROW(make_quadratic(vec({1.0, -1.0}).asDiagonal()), Error);
  const Problem p = make_quadratic(vec({6.0, 2.0}).asDiagonal(), vec({6.0, -2.0}));
  EXPECT_LE((p.optimum() - vec({-1.0, 1.0})).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(p.L(), 6.0);
  EXPECT_DOUBLE_EQ(p.mu(), 2.0);
  EXPECT_NEAR(p.f_opt(), -4.0, 1e-14);
}

TEST(SumProblem, ZeroRoughPart) {
  const double ls = 0.75;
  const Problem strong = make_quadratic(Mat::Identity(2, 2) * (2 * ls));
  const Problem s = make_sum_problem(strong, zero_term(2));
  EXPECT_DOUBLE_EQ(*s.lambda_star(), ls);
  EXPECT_NEAR(avg_hessian(s, vec({1.0, 3.0})).lambda_min, 2 * ls, 1e-14);
}

TEST(SumProblem, ConstantHessiansAdd) {
  const Problem strong = make_quadratic(Mat::Identity(1, 1) * 6.0);  // 3 w^2
  const Problem s = make_sum_problem(strong, quadratic_term(Mat::Identity(1, 1) * -2.0, Vec::Zero(1)));
  for (double w : {-3.0, 0.0, 2.5}) EXPECT_NEAR(hess(s, vec({w}))(0, 0), 4.0, 1e-14);
}

TEST(SumProblem, Sin2WithinBudgetMatchesExampleTwo) {
  // w^2 leaves lambda = 1 of budget, so alpha sin^2 fits while 0.46 alpha <= 1.
  const Problem strong = make_quadratic(Mat::Identity(1, 1) * 2.0);
  const double alpha = 2.0;
  const Problem s = make_sum_problem(strong, sin2_term(alpha));
  const Problem ex = make_sin2(alpha);
  for (int k = -50; k <= 50; ++k) {
    const Vec w = vec({0.2 * k});
    EXPECT_NEAR(eval(s, w), eval(ex, w), 1e-12);
    EXPECT_NEAR(grad(s, w)(0), grad(ex, w)(0), 1e-12);
    EXPECT_NEAR(hess(s, w)(0, 0), hess(ex, w)(0, 0), 1e-12);
  }
}

TEST(SumProblem, Sin2AboveBudgetIsRejected) {
  const Problem strong = make_quadratic(Mat::Identity(1, 1) * 2.0);
  EXPECT_THROW(make_sum_problem(strong, sin2_term(4.0)), ConstraintError);
}

TEST(SumProblem, DimensionMismatch) {
  const Problem strong = make_quadratic(Mat::Identity(2, 2));
  EXPECT_THROW(make_sum_problem(strong, zero_term(3)), Error);
}
