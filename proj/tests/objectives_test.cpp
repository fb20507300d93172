#include "stcomp/objectives.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

namespace {

using stcomp::constants;
using stcomp::gradient;
using stcomp::make_least_squares;
using stcomp::make_rosenbrock_sum;
using stcomp::Objective;
using stcomp::ObjectiveKind;
using stcomp::optimum;

Objective identity_ls(int d) {
  // h_i = e_i, b = 0: global Hessian is the identity, optimum at the origin.
  Objective obj;
  obj.kind = ObjectiveKind::least_squares;
  obj.n = d;
  obj.d = d;
  obj.h = Eigen::MatrixXd::Identity(d, d);
  obj.b = Eigen::VectorXd::Zero(d);
  return obj;
}

TEST(LeastSquares, SeededConstructionSatisfiesStrongConvexity) {
  stcomp::Rng rng(42);
  const Objective obj = make_least_squares(10, 5, rng);
  const auto c = constants(obj);
  EXPECT_GT(c.mu, 1e-3);
  ASSERT_TRUE(c.lf.has_value());
  EXPECT_LE(c.mu, *c.lf);
}

TEST(LeastSquares, RankDeficientRejected) {
  stcomp::Rng rng(1);
  EXPECT_THROW(make_least_squares(1, 2, rng), stcomp::ConfigError);
}

TEST(LeastSquares, IdentityHessianCase) {
  const Objective obj = identity_ls(3);
  const auto c = constants(obj);
  EXPECT_DOUBLE_EQ(c.mu, 1.0);
  ASSERT_TRUE(c.s_star.has_value());
  EXPECT_LT(c.s_star->norm(), 1e-12);
}

TEST(LeastSquares, GradientFormula) {
  Objective obj;
  obj.kind = ObjectiveKind::least_squares;
  obj.n = 1;
  obj.d = 2;
  obj.h.resize(1, 2);
  obj.h << 1, 0;
  obj.b.resize(1);
  obj.b << 2;
  Eigen::VectorXd x(2);
  x << 5, 7;
  Eigen::VectorXd expected(2);
  expected << 3, 0;  // h (h^T x - b)
  EXPECT_EQ(gradient(obj, 0, x), expected);
}

TEST(LeastSquares, GradientSumVanishesAtOptimum) {
  stcomp::Rng rng(7);
  const Objective obj = make_least_squares(12, 4, rng);
  const auto s = optimum(obj);
  ASSERT_TRUE(s.has_value());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < obj.n; ++i) total += gradient(obj, i, *s);
  EXPECT_LT(total.norm(), 1e-9);
}

TEST(LeastSquares, DiagonalSolve) {
  Objective obj = identity_ls(4);
  obj.b << 1, 2, 3, 4;
  const auto s = optimum(obj);
  ASSERT_TRUE(s.has_value());
  EXPECT_LT((*s - obj.b).norm(), 1e-12);
}

TEST(LeastSquares, HomogeneousSystemOptimumAtZero) {
  stcomp::Rng rng(3);
  Objective obj = make_least_squares(8, 3, rng);
  obj.b.setZero();
  const auto s = optimum(obj);
  ASSERT_TRUE(s.has_value());
  EXPECT_LT(s->norm(), 1e-12);
}

TEST(Rosenbrock, GradientVanishesAtOnes) {
  const Objective obj = make_rosenbrock_sum(3, 5, 1.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
  for (int i = 0; i < 3; ++i) EXPECT_LT(gradient(obj, i, ones).norm(), 1e-14);
  const auto s = optimum(obj);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(*s, ones);
}

TEST(Rosenbrock, NonUnitShiftHasNoClosedForm) {
  const Objective obj = make_rosenbrock_sum(2, 4, 0.5);
  EXPECT_FALSE(optimum(obj).has_value());
  EXPECT_FALSE(constants(obj).lf.has_value());
  EXPECT_DOUBLE_EQ(constants(obj).mu, 0.0);
}

TEST(Gradients, FiniteDifferenceAgreement) {
  stcomp::Rng rng(11);
  const Objective ls = make_least_squares(10, 5, rng);
  const Objective rb = make_rosenbrock_sum(10, 5, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd x(5);
    for (int j = 0; j < 5; ++j) x(j) = rng.uniform(-2.0, 2.0);
    const int i = static_cast<int>(rng.below(10));
    EXPECT_LE(stcomp::check_gradient(ls, i, x, 1e-5), 1e-6);
    EXPECT_LE(stcomp::check_gradient(rb, i, x, 1e-5), 1e-5);
  }
}

TEST(Gradients, FiniteDifferenceAtOptimum) {
  stcomp::Rng rng(13);
  const Objective ls = make_least_squares(9, 3, rng);
  const auto s = optimum(ls);
  ASSERT_TRUE(s.has_value());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < ls.n; ++i) {
    EXPECT_LE(stcomp::check_gradient(ls, i, *s, 1e-5), 1e-6);
    total += gradient(ls, i, *s);
  }
  EXPECT_LT(total.norm(), 1e-9);
}

TEST(Gradients, StepRangeEnforced) {
  const Objective obj = make_rosenbrock_sum(1, 3, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(stcomp::check_gradient(obj, 0, x, 1e-9), stcomp::ConfigError);
  EXPECT_THROW(stcomp::check_gradient(obj, 0, x, 1e-2), stcomp::ConfigError);
}

TEST(Gradients, NonFiniteInputRejected) {
  const Objective obj = make_rosenbrock_sum(1, 3, 1.0);
  Eigen::VectorXd x(3);
  x << 1.0, std::nan(""), 0.0;
  EXPECT_THROW(gradient(obj, 0, x), stcomp::NumericError);
}

TEST(StrongConvexity, GlobalWitness) {
  stcomp::Rng rng(17);
  const Objective obj = make_least_squares(10, 5, rng);
  const double mu = constants(obj).mu;
  auto global_value = [&](const Eigen::VectorXd& x) {
    double f = 0.0;
    for (int i = 0; i < obj.n; ++i) f += stcomp::value(obj, i, x);
    return f;
  };
  auto global_grad = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(obj.d);
    for (int i = 0; i < obj.n; ++i) g += gradient(obj, i, x);
    return g;
  };
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd x(5), y(5);
    for (int j = 0; j < 5; ++j) {
      x(j) = rng.uniform(-3.0, 3.0);
      y(j) = rng.uniform(-3.0, 3.0);
    }
    const double lhs = global_value(y);
    const double rhs = global_value(x) + global_grad(x).dot(y - x) +
                       0.5 * mu * (y - x).squaredNorm();
    EXPECT_GE(lhs, rhs - 1e-9);
  }
}

TEST(Lipschitz, PerNodeWitness) {
  stcomp::Rng rng(19);
  const Objective obj = make_least_squares(10, 5, rng);
  const double lf = *constants(obj).lf;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd x(5), y(5);
    for (int j = 0; j < 5; ++j) {
      x(j) = rng.uniform(-5.0, 5.0);
      y(j) = rng.uniform(-5.0, 5.0);
    }
    for (int i = 0; i < obj.n; ++i) {
      const double gap = (gradient(obj, i, x) - gradient(obj, i, y)).norm();
      EXPECT_LE(gap, lf * (x - y).norm() + 1e-9);
    }
  }
}

}  // namespace
