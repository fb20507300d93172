#pragma once

// Per-node objective families for the experiment harness.
//
//   least_squares   f_i(x) = 1/2 (h_i^T x - b_i)^2 with h_i in R^d, b_i scalar.
//                   The global Hessian sum_i h_i h_i^T is resampled until
//                   positive definite, so the global objective is strongly
//                   convex with mu = lambda_min of that sum.
//   rosenbrock_sum  f_i(x) = sum_{j=1}^{d-1} [ 100 (x_{j+1} - x_j^2)^2
//                                              + (x_j - a_i)^2 ].
//                   Convex-case benchmark; with a_i = 1 for all nodes the
//                   minimizer is the all-ones vector.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "stcomp/errors.hpp"
#include "stcomp/rng.hpp"

namespace stcomp {

enum class ObjectiveKind { least_squares, rosenbrock_sum };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::least_squares;
  int n = 0;
  int d = 0;
  Eigen::MatrixXd h;      // n x d, row i = h_i (least_squares)
  Eigen::VectorXd b;      // n (least_squares)
  Eigen::VectorXd shift;  // n, a_i (rosenbrock_sum)
  std::uint64_t seed = 0;
};

struct ObjectiveConstants {
  double mu = 0.0;                         // strong convexity of the global sum
  std::optional<double> lf;                // per-node gradient Lipschitz bound
  std::optional<Eigen::VectorXd> s_star;   // closed-form optimum when available
};

namespace detail {

inline void check_point(const Eigen::VectorXd& x, int d) {
  if (x.size() != d) throw NumericError("objective: point has wrong dimension");
  if (!x.allFinite()) throw NumericError("objective: point has non-finite entries");
}

}  // namespace detail

/// Draws h_i and b_i i.i.d. standard normal (row-major order: all of H, then
/// b), resampling until lambda_min(sum h_i h_i^T) > 1e-3. Requires n >= d.
inline Objective make_least_squares(int n, int d, Rng& rng, std::uint64_t seed_tag = 0) {
  if (d < 1) throw ConfigError("make_least_squares: d must be >= 1");
  if (n < d)
    throw ConfigError("make_least_squares: need n >= d for a generically full-rank Hessian");
  Objective obj;
  obj.kind = ObjectiveKind::least_squares;
  obj.n = n;
  obj.d = d;
  obj.seed = seed_tag;
  for (int attempt = 0; attempt < 100; ++attempt) {
    obj.h.resize(n, d);
    obj.b.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) obj.h(i, j) = rng.normal();
    for (int i = 0; i < n; ++i) obj.b(i) = rng.normal();
    Eigen::MatrixXd hess = obj.h.transpose() * obj.h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hess);
    if (solver.info() == Eigen::Success && solver.eigenvalues().minCoeff() > 1e-3)
      return obj;
  }
  throw ConfigError("make_least_squares: resample budget exhausted (100 attempts)");
}

inline Objective make_rosenbrock_sum(int n, int d, double a = 1.0) {
  if (n < 1) throw ConfigError("make_rosenbrock_sum: n must be >= 1");
  if (d < 2) throw ConfigError("make_rosenbrock_sum: d must be >= 2");
  Objective obj;
  obj.kind = ObjectiveKind::rosenbrock_sum;
  obj.n = n;
  obj.d = d;
  obj.shift = Eigen::VectorXd::Constant(n, a);
  return obj;
}

inline double value(const Objective& obj, int i, const Eigen::VectorXd& x) {
  detail::check_point(x, obj.d);
  if (i < 0 || i >= obj.n) throw ConfigError("objective: node index out of range");
  switch (obj.kind) {
    case ObjectiveKind::least_squares: {
      const double r = obj.h.row(i).dot(x) - obj.b(i);
      return 0.5 * r * r;
    }
    case ObjectiveKind::rosenbrock_sum: {
      const double a = obj.shift(i);
      double acc = 0.0;
      for (int j = 0; j + 1 < obj.d; ++j) {
        const double gap = x(j + 1) - x(j) * x(j);
        const double off = x(j) - a;
        acc += 100.0 * gap * gap + off * off;
      }
      return acc;
    }
  }
  throw ConfigError("objective: unknown kind");
}

inline Eigen::VectorXd gradient(const Objective& obj, int i, const Eigen::VectorXd& x) {
  detail::check_point(x, obj.d);
  if (i < 0 || i >= obj.n) throw ConfigError("objective: node index out of range");
  switch (obj.kind) {
    case ObjectiveKind::least_squares: {
      const double r = obj.h.row(i).dot(x) - obj.b(i);
      return obj.h.row(i).transpose() * r;
    }
    case ObjectiveKind::rosenbrock_sum: {
      const double a = obj.shift(i);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(obj.d);
      for (int j = 0; j + 1 < obj.d; ++j) {
        const double gap = x(j + 1) - x(j) * x(j);
        g(j) += -400.0 * x(j) * gap + 2.0 * (x(j) - a);
        g(j + 1) += 200.0 * gap;
      }
      return g;
    }
  }
  throw ConfigError("objective: unknown kind");
}

/// Closed-form optimum where one exists: dense symmetric solve for least
/// squares, the all-ones vector for the unit-shift Rosenbrock sum.
inline std::optional<Eigen::VectorXd> optimum(const Objective& obj) {
  switch (obj.kind) {
    case ObjectiveKind::least_squares: {
      Eigen::MatrixXd hess = obj.h.transpose() * obj.h;
      Eigen::VectorXd rhs = obj.h.transpose() * obj.b;
      Eigen::LDLT<Eigen::MatrixXd> solver(hess);
      if (solver.info() != Eigen::Success)
        throw NumericError("optimum: Hessian factorization failed");
      return solver.solve(rhs);
    }
    case ObjectiveKind::rosenbrock_sum: {
      if ((obj.shift.array() == 1.0).all())
        return Eigen::VectorXd::Ones(obj.d);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

inline ObjectiveConstants constants(const Objective& obj) {
  ObjectiveConstants c;
  switch (obj.kind) {
    case ObjectiveKind::least_squares: {
      Eigen::MatrixXd hess = obj.h.transpose() * obj.h;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hess);
      if (solver.info() != Eigen::Success)
        throw NumericError("constants: eigensolver failed");
      c.mu = solver.eigenvalues().minCoeff();
      double lf = 0.0;
      for (int i = 0; i < obj.n; ++i) lf = std::max(lf, obj.h.row(i).squaredNorm());
      c.lf = lf;
      c.s_star = optimum(obj);
      return c;
    }
    case ObjectiveKind::rosenbrock_sum: {
      c.mu = 0.0;
      c.s_star = optimum(obj);
      return c;
    }
  }
  return c;
}

/// Central-difference check of the analytic gradient; returns the maximum
/// per-coordinate error relative to max(1, ||grad||).
inline double check_gradient(const Objective& obj, int i, const Eigen::VectorXd& x, double h) {
  if (!(h >= 1e-8 && h <= 1e-3))
    throw ConfigError("check_gradient: step must lie in [1e-8, 1e-3]");
  const Eigen::VectorXd g = gradient(obj, i, x);
  const double denom = std::max(1.0, g.norm());
  double worst = 0.0;
  Eigen::VectorXd probe = x;
  for (int j = 0; j < obj.d; ++j) {
    probe(j) = x(j) + h;
    const double fp = value(obj, i, probe);
    probe(j) = x(j) - h;
    const double fm = value(obj, i, probe);
    probe(j) = x(j);
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(j)) / denom);
  }
  return worst;
}

}  // namespace stcomp
