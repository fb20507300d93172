#pragma once

// Drives one experiment: build graph/objective from the validated config,
// iterate the selected step function until the accuracy target or the round
// budget, account bytes, and watch the run's structural invariants
// (dual-sum conservation, average preservation, observer copy consistency).
// A diverging run is retried with halved kappa/kappa0 up to six times.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "stcomp/algorithms.hpp"
#include "stcomp/config.hpp"
#include "stcomp/errors.hpp"
#include "stcomp/log.hpp"
#include "stcomp/telemetry.hpp"

namespace stcomp {

struct RunRecord {
  std::string label;
  json config_snapshot;  // effective config, objective materialized
  Trace trace;
  Outcome outcome;
  std::optional<RateFit> fitted_rate;
  std::int64_t bytes_per_round = 0;  // per node
  double target_accuracy = 0.0;
  int step_halvings = 0;

  // Invariant monitors accumulated over the whole run.
  double max_dual_sum_norm = 0.0;   // max_t ||sum_i v_i(t)||
  double max_dual_norm = 0.0;       // max_t max_i ||v_i(t)||
  double max_mean_drift = 0.0;      // max_t ||mean x(t) - mean x(0)||
  bool observers_checked = false;
  bool observers_bit_identical = true;
};

inline json run_record_to_json(const RunRecord& rec) {
  json j;
  j["label"] = rec.label;
  j["config"] = rec.config_snapshot;
  switch (rec.outcome.kind) {
    case OutcomeKind::converged: j["outcome"] = "converged"; break;
    case OutcomeKind::exhausted: j["outcome"] = "exhausted"; break;
    case OutcomeKind::diverged: j["outcome"] = "diverged"; break;
  }
  j["outcome_round"] = rec.outcome.round;
  if (rec.fitted_rate) {
    j["fitted_rate"] = {{"gamma_hat", rec.fitted_rate->gamma_hat}, {"r2", rec.fitted_rate->r2}};
  } else {
    j["fitted_rate"] = nullptr;
  }
  j["bytes_per_round"] = rec.bytes_per_round;
  j["step_halvings"] = rec.step_halvings;
  j["max_dual_sum_norm"] = rec.max_dual_sum_norm;
  j["max_mean_drift"] = rec.max_mean_drift;
  if (rec.observers_checked) j["observers_bit_identical"] = rec.observers_bit_identical;
  if (!rec.trace.empty()) {
    const auto& last = rec.trace.back();
    j["final_round"] = last.round;
    if (last.suboptimality) j["final_suboptimality"] = *last.suboptimality;
    j["final_consensus_error"] = last.consensus_error;
    j["total_bytes"] = last.cumulative_bytes;
  }
  return j;
}

namespace detail_run {

struct Monitors {
  double max_dual_sum = 0.0;
  double max_dual = 0.0;
  double max_mean_drift = 0.0;
  bool observers_ok = true;
};

inline RunRecord run_once(const ExperimentConfig& cfg, const StepSizes& steps,
                          const Graph& g, const Eigen::MatrixXd& lap,
                          const Objective* obj, const std::optional<Eigen::VectorXd>& s_star) {
  const int n = g.n;
  const int dim = cfg.effective_dimension();

  RunRecord rec;
  rec.label = cfg.label;
  rec.target_accuracy = cfg.target_accuracy;

  Rng rng(cfg.seed);
  Eigen::MatrixXd x0(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) x0(i, j) = cfg.x0_scale * rng.normal();

  AlgorithmState st = make_state(cfg.algorithm, g, x0);
  const Eigen::RowVectorXd mean0 = st.x.colwise().mean();

  rec.bytes_per_round = cfg.compressor ? byte_cost(*cfg.compressor, dim)
                                       : static_cast<std::int64_t>(8) * dim;

  Monitors mon;
  const bool track_observers = uses_observers(cfg.algorithm);

  auto sample = [&](long round) {
    RoundSample s;
    s.round = round;
    if (s_star) s.suboptimality = suboptimality(st.x, *s_star);
    s.consensus_error = consensus_error(st.x);
    s.cumulative_bytes = rec.bytes_per_round * round;
    rec.trace.rounds.push_back(s);
    return s;
  };
  auto observe = [&] {
    if (is_primal_dual(cfg.algorithm)) {
      mon.max_dual_sum = std::max(mon.max_dual_sum, st.v.colwise().sum().norm());
      mon.max_dual = std::max(mon.max_dual, st.v.rowwise().norm().maxCoeff());
    }
    mon.max_mean_drift =
        std::max(mon.max_mean_drift, (st.x.colwise().mean() - mean0).norm());
    if (track_observers && !observer_copies_identical(st, g)) mon.observers_ok = false;
  };

  RoundSample first = sample(0);
  observe();
  auto metric = [&](const RoundSample& s) {
    return s.suboptimality ? *s.suboptimality : s.consensus_error;
  };

  rec.outcome = {OutcomeKind::exhausted, cfg.max_rounds};
  if (metric(first) <= cfg.target_accuracy) {
    rec.outcome = {OutcomeKind::converged, 0};
  } else {
    for (long t = 1; t <= cfg.max_rounds; ++t) {
      switch (cfg.algorithm) {
        case Algorithm::consensus_dc:
          step_consensus_dc(st, g, lap, *cfg.compressor, steps.kappa0, &rng);
          break;
        case Algorithm::consensus_oc:
          step_consensus_oc(st, g, lap, *cfg.compressor, steps.alpha, steps.kappa0, &rng);
          break;
        case Algorithm::dpd_baseline:
          step_dpd_baseline(st, lap, *obj, steps);
          break;
        case Algorithm::dpd_dc:
          step_dpd_dc(st, lap, *cfg.compressor, *obj, steps, &rng);
          break;
        case Algorithm::dpd_oc:
          step_dpd_oc(st, g, lap, *cfg.compressor, *obj, steps, cfg.observer_ordering, &rng);
          break;
        case Algorithm::dpd_fc:
          step_dpd_fc(st, lap, *cfg.compressor, *obj, steps, &rng);
          break;
      }
      if (!st.x.allFinite() || st.x.norm() > 1e12) {
        rec.outcome = {OutcomeKind::diverged, t};
        sample(t);
        break;
      }
      RoundSample s = sample(t);
      observe();
      if (metric(s) <= cfg.target_accuracy) {
        rec.outcome = {OutcomeKind::converged, t};
        break;
      }
    }
  }

  rec.max_dual_sum_norm = mon.max_dual_sum;
  rec.max_dual_norm = mon.max_dual;
  rec.max_mean_drift = mon.max_mean_drift;
  rec.observers_checked = track_observers;
  rec.observers_bit_identical = mon.observers_ok;
  rec.fitted_rate = fit_linear_rate(rec.trace);
  return rec;
}

}  // namespace detail_run

/// Execute a validated configuration. Deterministic given the config and
/// seed. Divergence triggers a retry with kappa and kappa0 halved, up to six
/// halvings; the returned record reflects the effective step sizes.
inline RunRecord run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Graph g = cfg.graph.build();
  if (!is_connected(g))
    throw ConfigError("graph: not connected; all algorithms require a connected graph");
  const Eigen::MatrixXd lap = laplacian(g);

  std::optional<Objective> obj;
  std::optional<Eigen::VectorXd> s_star;
  if (cfg.objective) {
    obj = cfg.objective->materialize(g.n, cfg.seed);
    s_star = optimum(*obj);
  }

  StepSizes steps = cfg.steps;
  constexpr int kMaxHalvings = 6;
  for (int halving = 0;; ++halving) {
    RunRecord rec = detail_run::run_once(cfg, steps, g, lap, obj ? &*obj : nullptr, s_star);
    rec.step_halvings = halving;

    ExperimentConfig effective = cfg;
    effective.steps = steps;
    rec.config_snapshot = config_to_json(effective);
    if (obj) {
      // Materialized objective, so the record alone replays the run.
      json oj;
      oj["kind"] = obj->kind == ObjectiveKind::least_squares ? "least_squares" : "rosenbrock_sum";
      oj["d"] = obj->d;
      if (obj->kind == ObjectiveKind::least_squares) {
        std::vector<double> h(static_cast<std::size_t>(obj->n * obj->d));
        for (int i = 0; i < obj->n; ++i)
          for (int k = 0; k < obj->d; ++k) h[static_cast<std::size_t>(i * obj->d + k)] = obj->h(i, k);
        oj["h"] = h;
        oj["b"] = std::vector<double>(obj->b.data(), obj->b.data() + obj->n);
      } else {
        oj["shifts"] = std::vector<double>(obj->shift.data(), obj->shift.data() + obj->n);
      }
      rec.config_snapshot["objective"] = oj;
    }

    if (rec.outcome.kind != OutcomeKind::diverged || halving == kMaxHalvings) {
      if (rec.outcome.kind == OutcomeKind::diverged)
        log::error("run " + cfg.label + ": still diverging after " +
                   std::to_string(kMaxHalvings) + " step halvings");
      return rec;
    }
    steps.kappa /= 2.0;
    steps.kappa0 /= 2.0;
    log::warn("run " + cfg.label + ": diverged at round " +
              std::to_string(rec.outcome.round) + "; retrying with kappa = " +
              std::to_string(steps.kappa) + ", kappa0 = " + std::to_string(steps.kappa0));
  }
}

}  // namespace stcomp
