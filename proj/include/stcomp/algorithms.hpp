#pragma once

// Synchronous-round state machines for compressed consensus and compressed
// primal-dual optimization over a fixed undirected graph.
//
// One round = one broadcast per node. What is broadcast depends on the
// compression method:
//   direct (DC)          the compressed state C(x_j, t)
//   observer-based (OC)  the compressed observer error C(x_j - xhat_j, t);
//                        every holder of a copy of x_j integrates the same
//                        broadcast, so all copies stay bit-identical
//   filter-based (FC)    the compressed filter error q_j = C(x_j - sigma_j, t)
//
// Observer copies are deliberately stored per holder (node i keeps its own
// copy of xhat_j for each neighbor j and for itself) rather than shared, so
// the synchronization premise is something the simulator can check, not
// something it assumes.

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "stcomp/compressors.hpp"
#include "stcomp/errors.hpp"
#include "stcomp/graph.hpp"
#include "stcomp/objectives.hpp"
#include "stcomp/rng.hpp"

namespace stcomp {

enum class Algorithm {
  consensus_dc,
  consensus_oc,
  dpd_baseline,
  dpd_dc,
  dpd_oc,
  dpd_fc,
};

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::consensus_dc: return "consensus_dc";
    case Algorithm::consensus_oc: return "consensus_oc";
    case Algorithm::dpd_baseline: return "dpd_baseline";
    case Algorithm::dpd_dc: return "dpd_dc";
    case Algorithm::dpd_oc: return "dpd_oc";
    case Algorithm::dpd_fc: return "dpd_fc";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_name(const std::string& s) {
  for (Algorithm a : {Algorithm::consensus_dc, Algorithm::consensus_oc,
                      Algorithm::dpd_baseline, Algorithm::dpd_dc, Algorithm::dpd_oc,
                      Algorithm::dpd_fc})
    if (s == algorithm_name(a)) return a;
  return std::nullopt;
}

inline bool is_primal_dual(Algorithm a) {
  return a == Algorithm::dpd_baseline || a == Algorithm::dpd_dc ||
         a == Algorithm::dpd_oc || a == Algorithm::dpd_fc;
}

inline bool uses_observers(Algorithm a) {
  return a == Algorithm::consensus_oc || a == Algorithm::dpd_oc;
}

struct StepSizes {
  double kappa = 0.05;   // primal-dual base step
  double kappa0 = 0.5;   // compressor / observer step
  double alpha = 0.5;    // consensus gain (observer-based consensus)
  double beta = 0.3;
  double eta = 0.1;

  void validate() const {
    if (!(kappa > 0.0)) throw ConfigError("steps.kappa: must be > 0");
    if (!(kappa0 > 0.0)) throw ConfigError("steps.kappa0: must be > 0");
    if (!(alpha > 0.0)) throw ConfigError("steps.alpha: must be > 0");
    if (!(beta > 0.0)) throw ConfigError("steps.beta: must be > 0");
    if (!(eta > 0.0)) throw ConfigError("steps.eta: must be > 0");
  }
};

/// In DPD-OC the observer increment and the x/v updates commit together at
/// round end; pre_update evaluates the x/v right-hand sides with the round-t
/// observer values (the printed time indices), post_update with the already
/// incremented ones.
enum class ObserverOrdering { pre_update, post_update };

struct AlgorithmState {
  Eigen::MatrixXd x;  // n x d, row i = node i
  Eigen::MatrixXd v;  // n x d for primal-dual variants, 0 x 0 otherwise
  // observers[i][j] = node i's copy of the observer of x_j, for j in N_i U {i}
  std::vector<std::map<int, Eigen::RowVectorXd>> observers;
  Eigen::MatrixXd sigma;  // n x d (FC filter)
  Eigen::MatrixXd z;      // n x d (FC integrator)
  long round = 0;
};

inline AlgorithmState make_state(Algorithm algo, const Graph& g, const Eigen::MatrixXd& x0) {
  if (x0.rows() != g.n) throw ConfigError("make_state: x0 row count must equal node count");
  AlgorithmState st;
  st.x = x0;
  const auto d = x0.cols();
  if (is_primal_dual(algo)) st.v = Eigen::MatrixXd::Zero(g.n, d);
  if (uses_observers(algo)) {
    st.observers.resize(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
      st.observers[static_cast<std::size_t>(i)][i] = Eigen::RowVectorXd::Zero(d);
      for (int j : g.neighbors(i))
        st.observers[static_cast<std::size_t>(i)][j] = Eigen::RowVectorXd::Zero(d);
    }
  }
  if (algo == Algorithm::dpd_fc) {
    st.sigma = Eigen::MatrixXd::Zero(g.n, d);
    st.z = Eigen::MatrixXd::Zero(g.n, d);
  }
  return st;
}

/// True iff every stored copy of xhat_j is bit-identical across its holders.
inline bool observer_copies_identical(const AlgorithmState& st, const Graph& g) {
  for (int j = 0; j < g.n; ++j) {
    const Eigen::RowVectorXd& own = st.observers[static_cast<std::size_t>(j)].at(j);
    for (int i : g.neighbors(j)) {
      const Eigen::RowVectorXd& copy = st.observers[static_cast<std::size_t>(i)].at(j);
      for (Eigen::Index c = 0; c < own.size(); ++c)
        if (own(c) != copy(c)) return false;
    }
  }
  return true;
}

namespace detail {

inline void check_finite_state(const AlgorithmState& st) {
  if (!st.x.allFinite())
    throw DivergenceError("state has non-finite primal entries at round " +
                              std::to_string(st.round),
                          st.round);
}

/// One compressed broadcast per node: row j = C(x_j, t).
inline Eigen::MatrixXd compress_rows(const CompressorSpec& spec, const Eigen::MatrixXd& rows,
                                     long t, Rng* rng) {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.rows(); ++j)
    out.row(j) = compress(spec, rows.row(j).transpose(), t, rng).decoded.transpose();
  return out;
}

/// Node i's Laplacian coupling through its own observer copies:
/// row i = sum_j L_ij xhat^i_j.
inline Eigen::MatrixXd observer_coupling(const AlgorithmState& st, const Eigen::MatrixXd& lap) {
  const auto n = lap.rows();
  const auto d = st.x.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& [j, copy] : st.observers[static_cast<std::size_t>(i)])
      out.row(i) += lap(i, j) * copy;
  return out;
}

/// Broadcast the compressed observer errors and integrate them into every
/// holder's copy (same value everywhere, so copies stay bit-identical).
inline void advance_observers(AlgorithmState& st, const Graph& g, const CompressorSpec& spec,
                              double kappa0, Rng* rng) {
  const auto d = st.x.cols();
  Eigen::MatrixXd broadcast(g.n, d);
  for (int j = 0; j < g.n; ++j) {
    const Eigen::RowVectorXd err =
        st.x.row(j) - st.observers[static_cast<std::size_t>(j)].at(j);
    broadcast.row(j) = compress(spec, err.transpose(), st.round, rng).decoded.transpose();
  }
  for (int j = 0; j < g.n; ++j) {
    const Eigen::RowVectorXd inc = kappa0 * broadcast.row(j);
    st.observers[static_cast<std::size_t>(j)].at(j) += inc;
    for (int i : g.neighbors(j)) st.observers[static_cast<std::size_t>(i)].at(j) += inc;
  }
}

inline Eigen::MatrixXd gradient_rows(const Objective& obj, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    g.row(i) = gradient(obj, static_cast<int>(i), x.row(i).transpose()).transpose();
  return g;
}

}  // namespace detail

/// x_i <- x_i - kappa0 sum_j L_ij C(x_j, t).
inline void step_consensus_dc(AlgorithmState& st, const Graph& g, const Eigen::MatrixXd& lap,
                              const CompressorSpec& spec, double kappa0, Rng* rng = nullptr) {
  (void)g;
  detail::check_finite_state(st);
  const Eigen::MatrixXd compressed = detail::compress_rows(spec, st.x, st.round, rng);
  st.x -= kappa0 * (lap * compressed);
  ++st.round;
}

/// Observer copies integrate the broadcast errors first; the state then
/// descends along its own (updated) copies: x_i <- x_i - alpha sum_j L_ij xhat^i_j.
inline void step_consensus_oc(AlgorithmState& st, const Graph& g, const Eigen::MatrixXd& lap,
                              const CompressorSpec& spec, double alpha, double kappa0,
                              Rng* rng = nullptr) {
  detail::check_finite_state(st);
  detail::advance_observers(st, g, spec, kappa0, rng);
  st.x -= alpha * detail::observer_coupling(st, lap);
  ++st.round;
}

/// Uncompressed primal-dual round (the baseline every compressed variant is
/// priced against).
inline void step_dpd_baseline(AlgorithmState& st, const Eigen::MatrixXd& lap,
                              const Objective& obj, const StepSizes& s) {
  detail::check_finite_state(st);
  const Eigen::MatrixXd grads = detail::gradient_rows(obj, st.x);
  const Eigen::MatrixXd coupling = lap * st.x;
  st.x -= s.kappa * (coupling + s.beta * st.v + s.eta * grads);
  st.v += s.kappa * s.beta * coupling;
  ++st.round;
}

/// Primal-dual with direct compression of the broadcast state.
inline void step_dpd_dc(AlgorithmState& st, const Eigen::MatrixXd& lap,
                        const CompressorSpec& spec, const Objective& obj, const StepSizes& s,
                        Rng* rng = nullptr) {
  detail::check_finite_state(st);
  const Eigen::MatrixXd grads = detail::gradient_rows(obj, st.x);
  const Eigen::MatrixXd coupling = lap * detail::compress_rows(spec, st.x, st.round, rng);
  st.x -= s.kappa0 * coupling + s.kappa * (s.beta * st.v + s.eta * grads);
  st.v += s.kappa0 * s.beta * coupling;
  ++st.round;
}

/// Primal-dual with observer-based compression.
inline void step_dpd_oc(AlgorithmState& st, const Graph& g, const Eigen::MatrixXd& lap,
                        const CompressorSpec& spec, const Objective& obj, const StepSizes& s,
                        ObserverOrdering ordering = ObserverOrdering::pre_update,
                        Rng* rng = nullptr) {
  detail::check_finite_state(st);
  const Eigen::MatrixXd grads = detail::gradient_rows(obj, st.x);
  Eigen::MatrixXd coupling;
  if (ordering == ObserverOrdering::pre_update) {
    coupling = detail::observer_coupling(st, lap);
    detail::advance_observers(st, g, spec, s.kappa0, rng);
  } else {
    detail::advance_observers(st, g, spec, s.kappa0, rng);
    coupling = detail::observer_coupling(st, lap);
  }
  st.x -= s.kappa * (coupling + s.beta * st.v + s.eta * grads);
  st.v += s.kappa * s.beta * coupling;
  ++st.round;
}

/// Primal-dual with filter-based compression; all right-hand sides use
/// round-t values and commit together.
inline void step_dpd_fc(AlgorithmState& st, const Eigen::MatrixXd& lap,
                        const CompressorSpec& spec, const Objective& obj, const StepSizes& s,
                        Rng* rng = nullptr) {
  detail::check_finite_state(st);
  const Eigen::MatrixXd grads = detail::gradient_rows(obj, st.x);
  const Eigen::MatrixXd q = detail::compress_rows(spec, st.x - st.sigma, st.round, rng);
  const Eigen::MatrixXd lap_q = lap * q;
  const Eigen::MatrixXd coupling = st.sigma - st.z + lap_q;
  st.x -= s.kappa * (coupling + s.beta * st.v + s.eta * grads);
  st.v += s.kappa * s.beta * coupling;
  st.sigma += s.kappa0 * q;
  st.z += s.kappa0 * (q - lap_q);
  ++st.round;
}

}  // namespace stcomp
