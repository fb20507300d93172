#pragma once

// Experiment configuration: JSON schema, strict validation (unknown keys are
// rejected, errors name the offending field path), and a canonical
// serialization so parse -> serialize -> parse is the identity.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "stcomp/algorithms.hpp"
#include "stcomp/compressors.hpp"
#include "stcomp/errors.hpp"
#include "stcomp/graph.hpp"
#include "stcomp/log.hpp"
#include "stcomp/objectives.hpp"

namespace stcomp {

using nlohmann::json;

struct GraphConfig {
  std::string kind = "ring";  // ring | edge_list
  int n = 10;
  double weight = 1.0;
  std::string path;

  Graph build() const {
    if (kind == "ring") return build_ring(n, weight);
    return load_graph(path);
  }
};

/// Either generation parameters (kind, d, seed, shift) or fully explicit data
/// (h/b rows for least squares, per-node shifts for the Rosenbrock sum); an
/// explicit objective makes a run replayable byte-for-byte from its record.
struct ObjectiveConfig {
  std::string kind = "least_squares";  // least_squares | rosenbrock_sum
  int d = 5;
  std::optional<std::uint64_t> seed;
  double shift = 1.0;                       // rosenbrock_sum default a_i
  std::optional<std::vector<double>> h;     // row-major n x d
  std::optional<std::vector<double>> b;     // n
  std::optional<std::vector<double>> shifts;  // n

  Objective materialize(int n, std::uint64_t fallback_seed) const {
    if (kind == "least_squares") {
      if (h && b) {
        if (static_cast<int>(h->size()) != n * d)
          throw ConfigError("objective.h: expected " + std::to_string(n * d) + " entries");
        if (static_cast<int>(b->size()) != n)
          throw ConfigError("objective.b: expected " + std::to_string(n) + " entries");
        Objective obj;
        obj.kind = ObjectiveKind::least_squares;
        obj.n = n;
        obj.d = d;
        obj.h.resize(n, d);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < d; ++j) obj.h(i, j) = (*h)[static_cast<std::size_t>(i * d + j)];
        obj.b = Eigen::Map<const Eigen::VectorXd>(b->data(), n);
        return obj;
      }
      const std::uint64_t s = seed.value_or(fallback_seed);
      Rng rng(s);
      return make_least_squares(n, d, rng, s);
    }
    if (kind == "rosenbrock_sum") {
      Objective obj = make_rosenbrock_sum(n, d, shift);
      if (shifts) {
        if (static_cast<int>(shifts->size()) != n)
          throw ConfigError("objective.shifts: expected " + std::to_string(n) + " entries");
        obj.shift = Eigen::Map<const Eigen::VectorXd>(shifts->data(), n);
      }
      return obj;
    }
    throw ConfigError("objective.kind: unknown kind '" + kind + "'");
  }
};

struct ExperimentConfig {
  std::string label = "run";
  std::string preset = "none";  // none | table1 | convex_rosenbrock | compressor_verify
  Algorithm algorithm = Algorithm::dpd_oc;
  GraphConfig graph;
  std::optional<CompressorSpec> compressor;
  std::optional<ObjectiveConfig> objective;
  StepSizes steps;
  std::optional<int> dimension;  // required when no objective fixes d
  long max_rounds = 100000;
  double target_accuracy = 1e-4;
  std::uint64_t seed = 0;
  ObserverOrdering observer_ordering = ObserverOrdering::pre_update;
  double x0_scale = 1.0;
  bool allow_unverified_delta = false;
  std::string output_dir = ".";

  int effective_dimension() const {
    if (objective) return objective->d;
    return dimension.value_or(0);
  }
};

namespace detail_cfg {

inline void require_keys(const json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(path + "." + it.key() + ": unknown key");
  }
}

inline double get_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(path + ": expected a number");
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": wrong type");
  }
}

}  // namespace detail_cfg

inline CompressorSpec parse_compressor(const json& j, const std::string& path = "compressor") {
  detail_cfg::require_keys(j, path,
                           {"kind", "k", "delta", "gamma_e", "l", "byte_cost_override", "seed"});
  if (!j.contains("kind")) throw ConfigError(path + ".kind: required");
  CompressorSpec spec;
  const auto kind = detail_cfg::get_as<std::string>(j.at("kind"), path + ".kind");
  const auto parsed = kind_from_name(kind);
  if (!parsed) throw ConfigError(path + ".kind: unknown kind '" + kind + "'");
  spec.kind = *parsed;
  if (j.contains("k")) spec.k = detail_cfg::get_as<int>(j.at("k"), path + ".k");
  if (j.contains("delta"))
    spec.delta = detail_cfg::get_number(j.at("delta"), path + ".delta");
  if (j.contains("gamma_e"))
    spec.gamma_e = detail_cfg::get_number(j.at("gamma_e"), path + ".gamma_e");
  if (j.contains("l")) spec.lbits = detail_cfg::get_as<int>(j.at("l"), path + ".l");
  if (j.contains("byte_cost_override"))
    spec.byte_cost_override =
        detail_cfg::get_as<std::int64_t>(j.at("byte_cost_override"), path + ".byte_cost_override");
  if (j.contains("seed"))
    spec.seed = detail_cfg::get_as<std::uint64_t>(j.at("seed"), path + ".seed");
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

inline json compressor_to_json(const CompressorSpec& spec) {
  json j;
  j["kind"] = kind_name(spec.kind);
  switch (spec.kind) {
    case CompressorKind::topk: j["k"] = spec.k; break;
    case CompressorKind::saturated_quantizer: j["delta"] = spec.delta; break;
    case CompressorKind::scaled_floor: j["gamma_e"] = spec.gamma_e; break;
    case CompressorKind::unbiased_lbits: j["l"] = spec.lbits; break;
    default: break;
  }
  if (spec.byte_cost_override) j["byte_cost_override"] = *spec.byte_cost_override;
  if (spec.seed) j["seed"] = *spec.seed;
  return j;
}

inline GraphConfig parse_graph(const json& j, const std::string& path = "graph") {
  detail_cfg::require_keys(j, path, {"kind", "n", "weight", "path"});
  GraphConfig g;
  if (!j.contains("kind")) throw ConfigError(path + ".kind: required");
  g.kind = detail_cfg::get_as<std::string>(j.at("kind"), path + ".kind");
  if (g.kind == "ring") {
    if (!j.contains("n")) throw ConfigError(path + ".n: required for ring graphs");
    g.n = detail_cfg::get_as<int>(j.at("n"), path + ".n");
    if (j.contains("weight")) g.weight = detail_cfg::get_number(j.at("weight"), path + ".weight");
    if (g.n < 3) throw ConfigError(path + ".n: ring needs n >= 3");
    if (!(g.weight > 0.0)) throw ConfigError(path + ".weight: must be > 0");
  } else if (g.kind == "edge_list") {
    if (!j.contains("path")) throw ConfigError(path + ".path: required for edge_list graphs");
    g.path = detail_cfg::get_as<std::string>(j.at("path"), path + ".path");
  } else {
    throw ConfigError(path + ".kind: unknown kind '" + g.kind + "'");
  }
  return g;
}

inline json graph_to_json(const GraphConfig& g) {
  json j;
  j["kind"] = g.kind;
  if (g.kind == "ring") {
    j["n"] = g.n;
    j["weight"] = g.weight;
  } else {
    j["path"] = g.path;
  }
  return j;
}

inline ObjectiveConfig parse_objective(const json& j, const std::string& path = "objective") {
  detail_cfg::require_keys(j, path, {"kind", "d", "seed", "shift", "h", "b", "shifts"});
  ObjectiveConfig o;
  if (!j.contains("kind")) throw ConfigError(path + ".kind: required");
  o.kind = detail_cfg::get_as<std::string>(j.at("kind"), path + ".kind");
  if (o.kind != "least_squares" && o.kind != "rosenbrock_sum")
    throw ConfigError(path + ".kind: unknown kind '" + o.kind + "'");
  if (!j.contains("d")) throw ConfigError(path + ".d: required");
  o.d = detail_cfg::get_as<int>(j.at("d"), path + ".d");
  if (o.d < 1) throw ConfigError(path + ".d: must be >= 1");
  if (j.contains("seed"))
    o.seed = detail_cfg::get_as<std::uint64_t>(j.at("seed"), path + ".seed");
  if (j.contains("shift")) o.shift = detail_cfg::get_number(j.at("shift"), path + ".shift");
  if (j.contains("h"))
    o.h = detail_cfg::get_as<std::vector<double>>(j.at("h"), path + ".h");
  if (j.contains("b"))
    o.b = detail_cfg::get_as<std::vector<double>>(j.at("b"), path + ".b");
  if (o.h.has_value() != o.b.has_value())
    throw ConfigError(path + ": explicit data needs both h and b");
  if (j.contains("shifts"))
    o.shifts = detail_cfg::get_as<std::vector<double>>(j.at("shifts"), path + ".shifts");
  return o;
}

inline json objective_to_json(const ObjectiveConfig& o) {
  json j;
  j["kind"] = o.kind;
  j["d"] = o.d;
  if (o.seed) j["seed"] = *o.seed;
  if (o.kind == "rosenbrock_sum" && !o.shifts) j["shift"] = o.shift;
  if (o.h) j["h"] = *o.h;
  if (o.b) j["b"] = *o.b;
  if (o.shifts) j["shifts"] = *o.shifts;
  return j;
}

inline StepSizes parse_steps(const json& j, const std::string& path = "steps") {
  detail_cfg::require_keys(j, path, {"kappa", "kappa0", "alpha", "beta", "eta"});
  StepSizes s;
  if (j.contains("kappa")) s.kappa = detail_cfg::get_number(j.at("kappa"), path + ".kappa");
  if (j.contains("kappa0")) s.kappa0 = detail_cfg::get_number(j.at("kappa0"), path + ".kappa0");
  if (j.contains("alpha")) s.alpha = detail_cfg::get_number(j.at("alpha"), path + ".alpha");
  if (j.contains("beta")) s.beta = detail_cfg::get_number(j.at("beta"), path + ".beta");
  if (j.contains("eta")) s.eta = detail_cfg::get_number(j.at("eta"), path + ".eta");
  if (!(s.kappa > 0.0)) throw ConfigError(path + ".kappa: must be > 0");
  if (!(s.kappa0 > 0.0)) throw ConfigError(path + ".kappa0: must be > 0");
  if (!(s.alpha > 0.0)) throw ConfigError(path + ".alpha: must be > 0");
  if (!(s.beta > 0.0)) throw ConfigError(path + ".beta: must be > 0");
  if (!(s.eta > 0.0)) throw ConfigError(path + ".eta: must be > 0");
  return s;
}

inline json steps_to_json(const StepSizes& s) {
  json j;
  j["kappa"] = s.kappa;
  j["kappa0"] = s.kappa0;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["eta"] = s.eta;
  return j;
}

/// Cross-field rules: which blocks an algorithm requires, and the
/// direct-compression applicability gate.
inline void validate_config(const ExperimentConfig& cfg) {
  cfg.steps.validate();
  if (cfg.max_rounds < 1) throw ConfigError("max_rounds: must be >= 1");
  if (!(cfg.x0_scale >= 0.0)) throw ConfigError("x0_scale: must be >= 0");
  if (cfg.label.empty()) throw ConfigError("label: must be nonempty");
  if (std::isnan(cfg.target_accuracy))
    throw ConfigError("target_accuracy: must not be NaN");

  const bool needs_objective = is_primal_dual(cfg.algorithm);
  if (needs_objective && !cfg.objective)
    throw ConfigError("objective: required for primal-dual algorithms");
  if (!needs_objective && cfg.objective)
    throw ConfigError("objective: not used by consensus algorithms, remove it");
  if (!cfg.objective && !cfg.dimension)
    throw ConfigError("dimension: required when no objective block fixes d");
  if (cfg.objective && cfg.dimension && *cfg.dimension != cfg.objective->d)
    throw ConfigError("dimension: conflicts with objective.d");
  if (cfg.dimension && *cfg.dimension < 1) throw ConfigError("dimension: must be >= 1");

  const bool needs_compressor = cfg.algorithm != Algorithm::dpd_baseline;
  if (needs_compressor && !cfg.compressor)
    throw ConfigError("compressor: required for algorithm " +
                      std::string(algorithm_name(cfg.algorithm)));
  if (!needs_compressor && cfg.compressor)
    throw ConfigError("compressor: dpd_baseline is uncompressed, remove it");

  if (cfg.objective && cfg.graph.kind == "ring" && cfg.objective->kind == "least_squares" &&
      cfg.graph.n < cfg.objective->d && !cfg.objective->h)
    throw ConfigError("objective.d: least_squares needs n >= d nodes");

  const bool direct = cfg.algorithm == Algorithm::consensus_dc || cfg.algorithm == Algorithm::dpd_dc;
  if (direct && cfg.compressor) {
    if (cfg.compressor->stochastic())
      throw ConfigError(
          "compressor.kind: direct compression requires a deterministic strong "
          "spatio-temporal compressor; stochastic kinds are only supported by "
          "observer- or filter-based algorithms");
    const bool linear = cfg.compressor->kind == CompressorKind::identity ||
                        cfg.compressor->kind == CompressorKind::scalarization;
    if (!linear && !cfg.allow_unverified_delta)
      throw ConfigError(
          "compressor.kind: direct compression is certified only for linear kinds "
          "(identity, scalarization), whose commutation constant delta is zero; pass "
          "allow_unverified_delta=true (or --allow-unverified-delta) to run anyway, and "
          "check `stcomp certify --delta` output for this compressor/graph pair");
  }

  if (cfg.compressor) {
    const int d = cfg.objective ? cfg.objective->d : 0;
    const double bound = certified_kappa0_bound(*cfg.compressor, d > 0 ? d : 1);
    if (cfg.steps.kappa0 > bound)
      log::warn("steps.kappa0 = " + std::to_string(cfg.steps.kappa0) +
                " exceeds the certified stability step " + std::to_string(bound) + " for " +
                kind_name(cfg.compressor->kind));
  }
}

inline ExperimentConfig parse_config(const json& j) {
  detail_cfg::require_keys(
      j, "config",
      {"label", "preset", "algorithm", "graph", "compressor", "objective", "steps",
       "dimension", "max_rounds", "target_accuracy", "seed", "observer_ordering",
       "x0_scale", "allow_unverified_delta", "output_dir"});
  ExperimentConfig cfg;
  if (j.contains("label")) cfg.label = detail_cfg::get_as<std::string>(j.at("label"), "label");
  if (j.contains("preset")) {
    cfg.preset = detail_cfg::get_as<std::string>(j.at("preset"), "preset");
    if (cfg.preset != "none" && cfg.preset != "table1" && cfg.preset != "convex_rosenbrock" &&
        cfg.preset != "compressor_verify")
      throw ConfigError("preset: unknown preset '" + cfg.preset + "'");
  }
  if (!j.contains("algorithm")) throw ConfigError("algorithm: required");
  const auto algo_name = detail_cfg::get_as<std::string>(j.at("algorithm"), "algorithm");
  const auto algo = algorithm_from_name(algo_name);
  if (!algo) throw ConfigError("algorithm: unknown algorithm '" + algo_name + "'");
  cfg.algorithm = *algo;
  if (!j.contains("graph")) throw ConfigError("graph: required");
  cfg.graph = parse_graph(j.at("graph"));
  if (j.contains("compressor")) cfg.compressor = parse_compressor(j.at("compressor"));
  if (j.contains("objective")) cfg.objective = parse_objective(j.at("objective"));
  if (j.contains("steps")) cfg.steps = parse_steps(j.at("steps"));
  if (j.contains("dimension"))
    cfg.dimension = detail_cfg::get_as<int>(j.at("dimension"), "dimension");
  if (j.contains("max_rounds"))
    cfg.max_rounds = detail_cfg::get_as<long>(j.at("max_rounds"), "max_rounds");
  if (j.contains("target_accuracy"))
    cfg.target_accuracy = detail_cfg::get_number(j.at("target_accuracy"), "target_accuracy");
  if (j.contains("seed")) cfg.seed = detail_cfg::get_as<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("observer_ordering")) {
    const auto s =
        detail_cfg::get_as<std::string>(j.at("observer_ordering"), "observer_ordering");
    if (s == "pre")
      cfg.observer_ordering = ObserverOrdering::pre_update;
    else if (s == "post")
      cfg.observer_ordering = ObserverOrdering::post_update;
    else
      throw ConfigError("observer_ordering: must be 'pre' or 'post'");
  }
  if (j.contains("x0_scale"))
    cfg.x0_scale = detail_cfg::get_number(j.at("x0_scale"), "x0_scale");
  if (j.contains("allow_unverified_delta"))
    cfg.allow_unverified_delta =
        detail_cfg::get_as<bool>(j.at("allow_unverified_delta"), "allow_unverified_delta");
  if (j.contains("output_dir"))
    cfg.output_dir = detail_cfg::get_as<std::string>(j.at("output_dir"), "output_dir");
  validate_config(cfg);
  return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["label"] = cfg.label;
  j["preset"] = cfg.preset;
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["graph"] = graph_to_json(cfg.graph);
  if (cfg.compressor) j["compressor"] = compressor_to_json(*cfg.compressor);
  if (cfg.objective) j["objective"] = objective_to_json(*cfg.objective);
  j["steps"] = steps_to_json(cfg.steps);
  if (cfg.dimension) j["dimension"] = *cfg.dimension;
  j["max_rounds"] = cfg.max_rounds;
  if (std::isinf(cfg.target_accuracy))
    j["target_accuracy"] = "inf";
  else
    j["target_accuracy"] = cfg.target_accuracy;
  j["seed"] = cfg.seed;
  j["observer_ordering"] =
      cfg.observer_ordering == ObserverOrdering::pre_update ? "pre" : "post";
  j["x0_scale"] = cfg.x0_scale;
  j["allow_unverified_delta"] = cfg.allow_unverified_delta;
  j["output_dir"] = cfg.output_dir;
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace stcomp
