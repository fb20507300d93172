#pragma once

// Per-round telemetry and post-processing: suboptimality / consensus error,
// linear-rate fitting over a trace tail, cumulative byte accounting, and the
// per-compressor summary table (bytes per iteration, iterations to target,
// total bytes).

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stcomp/errors.hpp"

namespace stcomp {

struct RoundSample {
  long round = 0;
  std::optional<double> suboptimality;  // present iff the optimum is known
  double consensus_error = 0.0;
  std::int64_t cumulative_bytes = 0;  // per node
};

struct Trace {
  std::vector<RoundSample> rounds;

  bool empty() const { return rounds.empty(); }
  const RoundSample& back() const { return rounds.back(); }
};

struct RateFit {
  double gamma_hat = 0.0;  // per-round contraction 1 - exp(slope)
  double r2 = 0.0;
};

enum class OutcomeKind { converged, exhausted, diverged };

struct Outcome {
  OutcomeKind kind = OutcomeKind::exhausted;
  long round = 0;
};

/// sum_i ||x_i - s*||^2 with x as an n x d matrix of per-node rows.
inline double suboptimality(const Eigen::MatrixXd& x, const Eigen::VectorXd& s_star) {
  if (x.cols() != s_star.size())
    throw NumericError("suboptimality: dimension mismatch");
  return (x.rowwise() - s_star.transpose()).squaredNorm();
}

/// sum_i ||x_i - mean(x)||^2.
inline double consensus_error(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).squaredNorm();
}

/// Log-linear fit of the suboptimality trace over its tail. Samples after the
/// trace first hits exactly zero are excluded; fewer than 20 usable positive
/// samples (or a constant tail) yields no fit.
inline std::optional<RateFit> fit_linear_rate(const Trace& trace, double tail_fraction = 0.5) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ConfigError("fit_linear_rate: tail_fraction must lie in (0,1]");
  std::vector<double> ts, ys;
  const std::size_t total = trace.rounds.size();
  const std::size_t start = total - static_cast<std::size_t>(std::ceil(tail_fraction * double(total)));
  for (std::size_t i = start; i < total; ++i) {
    const auto& s = trace.rounds[i];
    if (!s.suboptimality) continue;
    if (*s.suboptimality <= 0.0) break;  // positive prefix of the tail only
    ts.push_back(double(s.round));
    ys.push_back(std::log(*s.suboptimality));
  }
  if (ts.size() < 20) return std::nullopt;

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mx += ts[i];
    my += ys[i];
  }
  mx /= double(ts.size());
  my /= double(ts.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dx = ts[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;  // constant trace: r2 undefined
  RateFit fit;
  const double slope = sxy / sxx;
  fit.gamma_hat = 1.0 - std::exp(slope);
  fit.r2 = 1.0 - (syy - sxy * sxy / sxx) / syy;
  return fit;
}

/// Cumulative per-node bytes at the first round whose suboptimality is at or
/// below eps; absent when never reached.
inline std::optional<std::int64_t> bytes_to_accuracy(const Trace& trace, double eps) {
  for (const auto& s : trace.rounds) {
    if (!s.suboptimality) continue;
    if (*s.suboptimality <= eps) return s.cumulative_bytes;
  }
  return std::nullopt;
}

inline std::optional<long> rounds_to_accuracy(const Trace& trace, double eps) {
  for (const auto& s : trace.rounds) {
    if (!s.suboptimality) continue;
    if (*s.suboptimality <= eps) return s.round;
  }
  return std::nullopt;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Trace CSV: round,suboptimality,consensus_error,cumulative_bytes. Absent
/// suboptimality serializes as an empty field.
inline std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  out << "round,suboptimality,consensus_error,cumulative_bytes\n";
  for (const auto& s : trace.rounds) {
    out << s.round << ',';
    if (s.suboptimality) out << format_double(*s.suboptimality);
    out << ',' << format_double(s.consensus_error) << ',' << s.cumulative_bytes << '\n';
  }
  return out.str();
}

struct SummaryRow {
  std::string label;
  std::int64_t bytes_per_iter = 0;
  std::optional<long> iters_to_eps;
  std::optional<std::int64_t> total_bytes;
  std::optional<double> gamma_hat;
  std::optional<double> r2;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
};

inline std::string summary_to_csv(const SummaryTable& table) {
  std::ostringstream out;
  out << "label,bytes_per_iter,iters_to_eps,total_bytes,gamma_hat,r2\n";
  for (const auto& r : table.rows) {
    out << r.label << ',' << r.bytes_per_iter << ',';
    if (r.iters_to_eps) out << *r.iters_to_eps;
    out << ',';
    if (r.total_bytes) out << *r.total_bytes;
    out << ',';
    if (r.gamma_hat) out << format_double(*r.gamma_hat);
    out << ',';
    if (r.r2) out << format_double(*r.r2);
    out << '\n';
  }
  return out.str();
}

inline std::string summary_to_text(const SummaryTable& table) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %14s %14s %14s %12s %8s\n", "label",
                "bytes/iter", "iters_to_eps", "total_bytes", "gamma_hat", "r2");
  out << line;
  for (const auto& r : table.rows) {
    std::string iters = r.iters_to_eps ? std::to_string(*r.iters_to_eps) : "-";
    std::string total = r.total_bytes ? std::to_string(*r.total_bytes) : "-";
    char gbuf[32] = "-", rbuf[32] = "-";
    if (r.gamma_hat) std::snprintf(gbuf, sizeof(gbuf), "%.4g", *r.gamma_hat);
    if (r.r2) std::snprintf(rbuf, sizeof(rbuf), "%.4f", *r.r2);
    std::snprintf(line, sizeof(line), "%-14s %14lld %14s %14s %12s %8s\n", r.label.c_str(),
                  static_cast<long long>(r.bytes_per_iter), iters.c_str(), total.c_str(),
                  gbuf, rbuf);
    out << line;
  }
  return out.str();
}

}  // namespace stcomp
