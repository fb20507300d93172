#pragma once

// Empirical certifiers for the compressor axioms. None of these are proofs:
// they sample trajectories or points and report violation counts, fitted decay
// factors, and worst-case ratios. Estimates are lower bounds on the true
// worst case and are labeled as such.
//
//   certify_induced_decay  stability of x <- x - kappa0*C(x,t) (mean-square
//                          over trials for stochastic kinds)
//   certify_contraction    ||C(x)/p - x||^2 <= (1-phi)||x||^2 on sampled x
//   certify_pe             min/max window eigenvalues of an excitation schedule
//   estimate_delta         commutation gap between the stacked compressor and
//                          the disagreement projection S^T (x) I_d

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <utility>
#include <vector>

#include "stcomp/compressors.hpp"
#include "stcomp/errors.hpp"
#include "stcomp/graph.hpp"
#include "stcomp/rng.hpp"

namespace stcomp {

struct CertificationReport {
  std::optional<double> decay_rate;  // per-step factor, present only when r2 >= 0.9
  double r2 = 0.0;                   // of the log-norm regression (0 when not fitted)
  double lipschitz_estimate = 0.0;   // max sampled ||C(x,t)|| / ||x||
  std::int64_t violations = 0;
  std::int64_t samples = 0;
};

inline nlohmann::json to_json(const CertificationReport& r) {
  nlohmann::json j;
  if (r.decay_rate)
    j["decay_rate"] = *r.decay_rate;
  else
    j["decay_rate"] = nullptr;
  j["r2"] = r.r2;
  j["lipschitz_estimate"] = r.lipschitz_estimate;
  j["violations"] = r.violations;
  j["samples"] = r.samples;
  return j;
}

namespace detail {

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
  bool ok = false;
};

/// Least squares y ~ a + b*x. r2 is undefined (ok=false) for constant y.
inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit f;
  const auto n = xs.size();
  if (n < 2 || ys.size() != n) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return f;
  f.slope = sxy / sxx;
  const double ss_res = syy - sxy * sxy / sxx;
  f.r2 = 1.0 - ss_res / syy;
  f.ok = true;
  return f;
}

inline Eigen::VectorXd unit_vector(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Sample with log-uniform magnitude in [1e-3, 1e3] and gaussian direction.
inline Eigen::VectorXd mixed_scale_vector(int d, Rng& rng) {
  const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

}  // namespace detail

/// Simulate x(t+1) = x(t) - kappa0*C(x(t), t) from `trials` random unit
/// initial points over `horizon` rounds. A trajectory violates if its final
/// norm exceeds its initial norm (divergence past 1e12 is also a violation,
/// never an exception). Deterministic kinds fit the mean log-norm over the
/// trajectory tail; stochastic kinds fit the log of the mean squared norm
/// (mean-square stability) and check the mean curve for violation instead of
/// each noisy trajectory.
inline CertificationReport certify_induced_decay(const CompressorSpec& spec, double kappa0,
                                                 int d, int trials, int horizon, Rng& rng) {
  spec.validate();
  if (trials < 10) throw ConfigError("certify_induced_decay: trials must be >= 10");
  if (horizon < 50) throw ConfigError("certify_induced_decay: horizon must be >= 50");
  if (!(kappa0 > 0.0)) throw ConfigError("certify_induced_decay: kappa0 must be > 0");

  const bool mean_square = spec.stochastic();
  CertificationReport report;
  report.samples = trials;

  // norms(t, trial); -1 marks rounds past a divergence cutoff.
  Eigen::MatrixXd norms(horizon + 1, trials);
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd x = detail::unit_vector(d, rng);
    norms(0, trial) = x.norm();
    bool diverged = false;
    for (long t = 0; t < horizon; ++t) {
      if (!diverged) {
        const double before = x.norm();
        CompressedMessage msg = compress(spec, x, t, &rng);
        if (before > 1e-150)
          report.lipschitz_estimate =
              std::max(report.lipschitz_estimate, msg.decoded.norm() / before);
        x -= kappa0 * msg.decoded;
        if (!x.allFinite() || x.norm() > 1e12) diverged = true;
      }
      norms(t + 1, trial) = diverged ? -1.0 : x.norm();
    }
    if (diverged) {
      ++report.violations;
    } else if (!mean_square && norms(horizon, trial) > norms(0, trial)) {
      ++report.violations;
    }
  }

  // Curve to regress: mean log-norm (deterministic) or log mean squared norm
  // (stochastic). Rounds touched by divergence or exact zeros are skipped.
  std::vector<double> ts, ys;
  for (long t = horizon / 2; t <= horizon; ++t) {
    bool usable = true;
    double acc = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      const double v = norms(t, trial);
      if (v <= 0.0) {
        usable = false;
        break;
      }
      acc += mean_square ? v * v : std::log(v);
    }
    if (!usable) continue;
    ts.push_back(double(t));
    ys.push_back(mean_square ? 0.5 * std::log(acc / trials) : acc / trials);
  }

  if (mean_square) {
    // Violation check on the averaged curve over the full horizon.
    bool valid = true;
    double first = 0.0, last = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      if (norms(horizon, trial) < 0.0) valid = false;
      first += norms(0, trial) * norms(0, trial);
      last += norms(horizon, trial) * norms(horizon, trial);
    }
    if (valid && last > first) ++report.violations;
  }

  if (ts.size() >= 10) {
    detail::LineFit fit = detail::fit_line(ts, ys);
    if (fit.ok) {
      report.r2 = fit.r2;
      if (fit.r2 >= 0.9) report.decay_rate = std::exp(fit.slope);
    }
  }
  return report;
}

/// Sampled check of the contraction inequality for deterministic kinds.
inline CertificationReport certify_contraction(const CompressorSpec& spec, double p,
                                               double phi, std::int64_t samples, int d,
                                               Rng& rng) {
  spec.validate();
  if (spec.stochastic())
    throw ConfigError("certify_contraction: use certify_contraction_expectation for stochastic kinds");
  if (!(p > 0.0)) throw ConfigError("certify_contraction: p must be > 0");
  if (!(phi > 0.0 && phi <= 1.0)) throw ConfigError("certify_contraction: phi must be in (0,1]");

  CertificationReport report;
  report.samples = samples;
  for (std::int64_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = detail::mixed_scale_vector(d, rng);
    const long t = static_cast<long>(rng.below(1000));
    const CompressedMessage msg = compress(spec, x, t);
    const double nx2 = x.squaredNorm();
    if (x.norm() > 1e-150)
      report.lipschitz_estimate =
          std::max(report.lipschitz_estimate, msg.decoded.norm() / x.norm());
    const double lhs = (msg.decoded / p - x).squaredNorm();
    if (lhs > (1.0 - phi) * nx2 + 1e-12 * nx2) ++report.violations;
  }
  return report;
}

/// Contraction in expectation for stochastic kinds: the per-point mean over
/// `inner` draws is tested with a three-standard-error statistical slack.
inline CertificationReport certify_contraction_expectation(const CompressorSpec& spec,
                                                           double p, double phi,
                                                           std::int64_t samples,
                                                           int inner, int d, Rng& rng) {
  spec.validate();
  if (inner < 2) throw ConfigError("certify_contraction_expectation: inner must be >= 2");
  if (!(p > 0.0)) throw ConfigError("certify_contraction_expectation: p must be > 0");
  if (!(phi > 0.0 && phi <= 1.0))
    throw ConfigError("certify_contraction_expectation: phi must be in (0,1]");

  CertificationReport report;
  report.samples = samples;
  for (std::int64_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = detail::mixed_scale_vector(d, rng);
    const double nx2 = x.squaredNorm();
    double mean = 0.0, m2 = 0.0;
    for (int r = 0; r < inner; ++r) {
      const CompressedMessage msg = compress(spec, x, 0, &rng);
      const double v = (msg.decoded / p - x).squaredNorm();
      const double delta = v - mean;
      mean += delta / double(r + 1);
      m2 += delta * (v - mean);
      if (x.norm() > 1e-150)
        report.lipschitz_estimate =
            std::max(report.lipschitz_estimate, msg.decoded.norm() / x.norm());
    }
    const double sem = std::sqrt(std::max(m2, 0.0) / double(inner - 1) / double(inner));
    if (mean > (1.0 - phi) * nx2 + 1e-12 * nx2 + 3.0 * sem) ++report.violations;
  }
  return report;
}

enum class ExcitationSchedule { cycling_basis };

/// psi(t) for the scalarization compressor's schedule.
inline Eigen::VectorXd excitation_vector(ExcitationSchedule schedule, long t, int d) {
  switch (schedule) {
    case ExcitationSchedule::cycling_basis:
      return Eigen::VectorXd::Unit(d, static_cast<int>(t % d));
  }
  throw ConfigError("excitation_vector: unknown schedule");
}

/// Windowed persistence-of-excitation bounds: over every window
/// [t, t+T1), compute W(t) = sum psi(s) psi(s)^T and return the smallest
/// lambda_min and largest lambda_max seen for t in [0, t_max].
inline std::pair<double, double> certify_pe(ExcitationSchedule schedule, int window,
                                            int d, long t_max) {
  if (window < 1) throw ConfigError("certify_pe: window must be >= 1");
  if (t_max < 0) throw ConfigError("certify_pe: t_max must be >= 0");
  double alpha1 = std::numeric_limits<double>::infinity();
  double alpha2 = 0.0;
  for (long t = 0; t <= t_max; ++t) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    for (long s = t; s < t + window; ++s) {
      const Eigen::VectorXd psi = excitation_vector(schedule, s, d);
      w.noalias() += psi * psi.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w);
    if (solver.info() != Eigen::Success) throw NumericError("certify_pe: eigensolver failed");
    alpha1 = std::min(alpha1, solver.eigenvalues().minCoeff());
    alpha2 = std::max(alpha2, solver.eigenvalues().maxCoeff());
  }
  return {alpha1, alpha2};
}

/// Sampled lower bound on the commutation constant delta:
///   max ||Cbar(S_kron^T x, t) - S_kron^T Cstack(x, t)|| / ||S_kron^T x||
/// over random stacked vectors and rounds. Zero (to rounding) for linear
/// kinds; strictly positive witnesses non-commutation for nonlinear ones.
inline double estimate_delta(const CompressorSpec& spec, const Spectrum& spectrum, int d,
                             std::int64_t samples, Rng& rng) {
  spec.validate();
  if (spec.stochastic()) throw ConfigError("estimate_delta: deterministic kinds only");
  const int n = static_cast<int>(spectrum.s_basis.rows());
  const int m = n - 1;

  double worst = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const long t = static_cast<long>(rng.below(1000));
    std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = detail::mixed_scale_vector(d, rng);

    // y_k = sum_i S(i,k) x_i, then compress blockwise (Cbar) and compare with
    // the projection of the blockwise-compressed stack.
    double ynorm2 = 0.0;
    double gap2 = 0.0;
    std::vector<Eigen::VectorXd> cx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      cx[static_cast<std::size_t>(i)] = compress(spec, x[static_cast<std::size_t>(i)], t).decoded;
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd yk = Eigen::VectorXd::Zero(d);
      Eigen::VectorXd pk = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < n; ++i) {
        yk += spectrum.s_basis(i, k) * x[static_cast<std::size_t>(i)];
        pk += spectrum.s_basis(i, k) * cx[static_cast<std::size_t>(i)];
      }
      ynorm2 += yk.squaredNorm();
      gap2 += (compress(spec, yk, t).decoded - pk).squaredNorm();
    }
    const double ynorm = std::sqrt(ynorm2);
    if (ynorm < 1e-9) continue;
    worst = std::max(worst, std::sqrt(gap2) / ynorm);
  }
  return worst;
}

}  // namespace stcomp
