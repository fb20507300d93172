#pragma once

// Compressor catalog. Every compressor is a map C(x, t) -> R^d whose induced
// recursion x <- x - kappa0*C(x,t) contracts to zero; what travels on the wire
// is smaller than x itself, and byte_cost() prices it. Decoded values are what
// the receiving update consumes; the simulator never bit-packs.
//
// Catalog:
//   identity            C(x,t) = x
//   scalarization       C(x,t) = psi(t) psi(t)^T x, psi cycling through basis
//                       vectors (index t mod d); one scalar on the wire
//   topk                keep the k largest-magnitude coordinates
//   uniform_quantizer   (||x||_inf / 2) * sgn(x); norm + sign bits on the wire
//   saturated_quantizer pass-through below delta, magnitude floored to a
//                       multiple of delta above it
//   scaled_floor        gamma_e^t * floor(|x| / gamma_e^t) * sgn(x),
//                       gamma_e in (1/e, 1); integer vector on the wire
//   unbiased_lbits      stochastic l-bit quantizer, unbiased, fresh uniform
//                       perturbation per call
//
// saturated_quantizer and scaled_floor quantize the magnitude and re-attach
// the sign, so ||C(x,t)|| <= ||x|| holds on all orthants and the contraction
// bound (1 - 3/4 for the saturated quantizer) is met exactly.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "stcomp/errors.hpp"
#include "stcomp/rng.hpp"

namespace stcomp {

enum class CompressorKind {
  identity,
  scalarization,
  topk,
  uniform_quantizer,
  saturated_quantizer,
  scaled_floor,
  unbiased_lbits,
};

inline const char* kind_name(CompressorKind k) {
  switch (k) {
    case CompressorKind::identity: return "identity";
    case CompressorKind::scalarization: return "scalarization";
    case CompressorKind::topk: return "topk";
    case CompressorKind::uniform_quantizer: return "uniform_quantizer";
    case CompressorKind::saturated_quantizer: return "saturated_quantizer";
    case CompressorKind::scaled_floor: return "scaled_floor";
    case CompressorKind::unbiased_lbits: return "unbiased_lbits";
  }
  return "?";
}

inline std::optional<CompressorKind> kind_from_name(const std::string& s) {
  for (CompressorKind k :
       {CompressorKind::identity, CompressorKind::scalarization, CompressorKind::topk,
        CompressorKind::uniform_quantizer, CompressorKind::saturated_quantizer,
        CompressorKind::scaled_floor, CompressorKind::unbiased_lbits})
    if (s == kind_name(k)) return k;
  return std::nullopt;
}

struct CompressorSpec {
  CompressorKind kind = CompressorKind::identity;
  int k = 1;             // topk
  double delta = 1.0;    // saturated_quantizer
  double gamma_e = 0.9;  // scaled_floor
  int lbits = 4;         // unbiased_lbits
  std::optional<std::int64_t> byte_cost_override;
  std::optional<std::uint64_t> seed;  // required by certifiers of stochastic kinds

  bool stochastic() const { return kind == CompressorKind::unbiased_lbits; }

  void validate() const {
    switch (kind) {
      case CompressorKind::topk:
        if (k < 1) throw ConfigError("compressor.k: must be >= 1");
        break;
      case CompressorKind::saturated_quantizer:
        if (!(delta > 0.0)) throw ConfigError("compressor.delta: must be > 0");
        break;
      case CompressorKind::scaled_floor:
        if (!(gamma_e > std::exp(-1.0) && gamma_e < 1.0))
          throw ConfigError("compressor.gamma_e: must lie in (1/e, 1)");
        break;
      case CompressorKind::unbiased_lbits:
        if (lbits < 1) throw ConfigError("compressor.l: must be >= 1");
        break;
      default:
        break;
    }
    if (byte_cost_override && *byte_cost_override < 0)
      throw ConfigError("compressor.byte_cost_override: must be >= 0");
  }
};

struct CompressedMessage {
  Eigen::VectorXd decoded;
  std::int64_t byte_cost = 0;
  std::string payload_descriptor;
};

/// Wire-size model: real_bytes per transmitted scalar (default 8), int_bytes
/// per transmitted integer level (default 4), sign bits packed into whole
/// bytes. Top-k index transmission is free by default so that k values cost
/// exactly real_bytes*k.
struct CostModel {
  int real_bytes = 8;
  int int_bytes = 4;
  int topk_index_bytes = 0;
  std::int64_t unbiased_lbits_default = 20;  // calibrated constant, see README
};

inline std::int64_t byte_cost(const CompressorSpec& spec, int d,
                              const CostModel& model = CostModel{}) {
  if (d < 1) throw ConfigError("byte_cost: dimension must be >= 1");
  if (spec.byte_cost_override) return *spec.byte_cost_override;
  const auto rb = static_cast<std::int64_t>(model.real_bytes);
  switch (spec.kind) {
    case CompressorKind::identity: return rb * d;
    case CompressorKind::scalarization: return rb;
    case CompressorKind::topk:
      return (rb + model.topk_index_bytes) * std::min(spec.k, d);
    case CompressorKind::uniform_quantizer: return rb + (d + 7) / 8;
    case CompressorKind::saturated_quantizer: return rb * d;
    case CompressorKind::scaled_floor:
      return static_cast<std::int64_t>(model.int_bytes) * d;
    case CompressorKind::unbiased_lbits: return model.unbiased_lbits_default;
  }
  throw ConfigError("byte_cost: unknown kind");
}

namespace detail {

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Indices of the k largest |x_i|; ties keep the lowest index.
inline std::vector<int> topk_indices(const Eigen::VectorXd& x, int k) {
  std::vector<int> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(x(a)) > std::abs(x(b));
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace detail

/// Evaluate C(x, t). `rng` must be supplied for stochastic kinds (one fresh
/// perturbation vector is drawn per call) and is ignored otherwise.
inline CompressedMessage compress(const CompressorSpec& spec, const Eigen::VectorXd& x,
                                  long t, Rng* rng = nullptr) {
  spec.validate();
  if (!x.allFinite()) throw NumericError("compress: input vector has non-finite entries");
  if (t < 0) throw ConfigError("compress: round index must be >= 0");
  if (spec.stochastic() && rng == nullptr)
    throw ConfigError("compress: stochastic compressor requires a random stream");

  const int d = static_cast<int>(x.size());
  CompressedMessage msg;
  msg.byte_cost = byte_cost(spec, d);

  switch (spec.kind) {
    case CompressorKind::identity: {
      msg.decoded = x;
      msg.payload_descriptor = std::to_string(d) + " scalars";
      return msg;
    }
    case CompressorKind::scalarization: {
      const int i = static_cast<int>(t % d);
      msg.decoded = Eigen::VectorXd::Zero(d);
      msg.decoded(i) = x(i);
      msg.payload_descriptor = "1 scalar";
      return msg;
    }
    case CompressorKind::topk: {
      if (spec.k > d)
        throw ConfigError("compressor.k: must be <= dimension " + std::to_string(d));
      msg.decoded = Eigen::VectorXd::Zero(d);
      for (int i : detail::topk_indices(x, spec.k)) msg.decoded(i) = x(i);
      msg.payload_descriptor = std::to_string(spec.k) + " scalars";
      return msg;
    }
    case CompressorKind::uniform_quantizer: {
      const double half = x.cwiseAbs().maxCoeff() / 2.0;
      msg.decoded = x.unaryExpr([half](double v) { return half * detail::sgn(v); });
      msg.payload_descriptor = "norm + " + std::to_string(d) + " sign bits";
      return msg;
    }
    case CompressorKind::saturated_quantizer: {
      const double delta = spec.delta;
      msg.decoded = x.unaryExpr([delta](double v) {
        double a = std::abs(v);
        if (a <= delta) return v;
        return detail::sgn(v) * delta * std::floor(a / delta);
      });
      msg.payload_descriptor = std::to_string(d) + " quantized scalars";
      return msg;
    }
    case CompressorKind::scaled_floor: {
      const double scale = std::pow(spec.gamma_e, static_cast<double>(t));
      if (scale < 1e-280) {
        // Quantization step is below double resolution; the map is the
        // identity to machine precision.
        msg.decoded = x;
      } else {
        msg.decoded = x.unaryExpr([scale](double v) {
          return detail::sgn(v) * scale * std::floor(std::abs(v) / scale);
        });
      }
      msg.payload_descriptor = std::to_string(d) + " integer levels";
      return msg;
    }
    case CompressorKind::unbiased_lbits: {
      const double norm_inf = x.cwiseAbs().maxCoeff();
      msg.payload_descriptor =
          "norm + " + std::to_string(d) + "x" + std::to_string(spec.lbits) + "-bit levels";
      if (norm_inf == 0.0) {
        msg.decoded = Eigen::VectorXd::Zero(d);
        return msg;
      }
      const double levels = std::ldexp(1.0, spec.lbits - 1);  // 2^(l-1)
      msg.decoded.resize(d);
      for (int i = 0; i < d; ++i) {
        const double omega = rng->uniform01();
        const double level = std::floor(levels * std::abs(x(i)) / norm_inf + omega);
        msg.decoded(i) = norm_inf / levels * detail::sgn(x(i)) * level;
      }
      return msg;
    }
  }
  throw ConfigError("compress: unknown kind");
}

/// Largest kappa0 for which the induced recursion is known to stay stable;
/// used only to warn on risky configurations.
inline double certified_kappa0_bound(const CompressorSpec& spec, int d) {
  switch (spec.kind) {
    case CompressorKind::identity: return 2.0;
    case CompressorKind::scalarization: return 2.0;
    case CompressorKind::topk: return 2.0;
    case CompressorKind::uniform_quantizer: return 4.0 / d;  // 2/p with p = d/2
    case CompressorKind::saturated_quantizer: return 2.0;
    case CompressorKind::scaled_floor: return 1.0;
    case CompressorKind::unbiased_lbits: return 1.0;
  }
  return 1.0;
}

}  // namespace stcomp
