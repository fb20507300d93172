#include "stcomp/compressors.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace {

using stcomp::byte_cost;
using stcomp::compress;
using stcomp::CompressorKind;
using stcomp::CompressorSpec;

CompressorSpec make(CompressorKind kind) {
  CompressorSpec spec;
  spec.kind = kind;
  return spec;
}

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

TEST(Scalarization, CyclesThroughCoordinates) {
  const auto spec = make(CompressorKind::scalarization);
  EXPECT_EQ(compress(spec, vec({3, 4}), 0).decoded, vec({3, 0}));
  EXPECT_EQ(compress(spec, vec({3, 4}), 1).decoded, vec({0, 4}));
  EXPECT_EQ(compress(spec, vec({3, 4}), 2).decoded, vec({3, 0}));  // period d
}

TEST(Scalarization, DeterministicAcrossCalls) {
  const auto spec = make(CompressorKind::scalarization);
  stcomp::Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.normal();
    const long t = static_cast<long>(rng.below(50));
    const auto a = compress(spec, x, t).decoded;
    const auto b = compress(spec, x, t).decoded;
    ASSERT_EQ(a, b);
  }
}

TEST(TopK, KeepsLargestMagnitudes) {
  auto spec = make(CompressorKind::topk);
  spec.k = 2;
  EXPECT_EQ(compress(spec, vec({3, -5, 1}), 0).decoded, vec({3, -5, 0}));
}

TEST(TopK, TiesKeepLowestIndex) {
  auto spec = make(CompressorKind::topk);
  spec.k = 1;
  EXPECT_EQ(compress(spec, vec({2, -2, 2}), 0).decoded, vec({2, 0, 0}));
  spec.k = 2;
  EXPECT_EQ(compress(spec, vec({2, -2, 2}), 0).decoded, vec({2, -2, 0}));
}

TEST(TopK, RejectsKBeyondDimension) {
  auto spec = make(CompressorKind::topk);
  spec.k = 4;
  EXPECT_THROW(compress(spec, vec({1, 2}), 0), stcomp::ConfigError);
}

TEST(UniformQuantizer, HalfInfNormTimesSigns) {
  const auto spec = make(CompressorKind::uniform_quantizer);
  EXPECT_EQ(compress(spec, vec({2, -4}), 0).decoded, vec({2, -2}));
  // sgn(0) = 0 keeps zero coordinates at zero.
  EXPECT_EQ(compress(spec, vec({0, 3}), 0).decoded, vec({0, 1.5}));
}

TEST(SaturatedQuantizer, PassThroughBelowDeltaFlooredAbove) {
  auto spec = make(CompressorKind::saturated_quantizer);
  spec.delta = 1.0;
  EXPECT_EQ(compress(spec, vec({0.5, 2.3}), 0).decoded, vec({0.5, 2.0}));
  // Magnitude flooring: the quantized value never exceeds the input magnitude.
  EXPECT_EQ(compress(spec, vec({-2.3}), 0).decoded, vec({-2.0}));
  EXPECT_EQ(compress(spec, vec({-0.5}), 0).decoded, vec({-0.5}));
}

TEST(ScaledFloor, ShrinkingGrid) {
  auto spec = make(CompressorKind::scaled_floor);
  spec.gamma_e = 0.9;
  EXPECT_EQ(compress(spec, vec({1.7}), 1).decoded, vec({0.9}));
  EXPECT_EQ(compress(spec, vec({1.7}), 0).decoded, vec({1.0}));
  // Large t: the grid is finer than double resolution, map becomes identity.
  EXPECT_EQ(compress(spec, vec({1.7}), 100000).decoded, vec({1.7}));
}

TEST(ScaledFloor, GammaRangeValidated) {
  auto spec = make(CompressorKind::scaled_floor);
  spec.gamma_e = 0.5;  // valid: 0.5 > 1/e
  EXPECT_NO_THROW(spec.validate());
  spec.gamma_e = 0.2;  // below 1/e
  EXPECT_THROW(spec.validate(), stcomp::ConfigError);
  spec.gamma_e = 1.0;
  EXPECT_THROW(spec.validate(), stcomp::ConfigError);
}

TEST(UnbiasedLBits, ExactlyRepresentablePointIsFixed) {
  auto spec = make(CompressorKind::unbiased_lbits);
  stcomp::Rng rng(11);
  for (int l : {1, 2, 4, 8}) {
    spec.lbits = l;
    for (int rep = 0; rep < 200; ++rep) {
      const auto out = compress(spec, vec({4}), 0, &rng).decoded;
      ASSERT_DOUBLE_EQ(out(0), 4.0);
    }
  }
}

TEST(UnbiasedLBits, RequiresRandomStream) {
  auto spec = make(CompressorKind::unbiased_lbits);
  EXPECT_THROW(compress(spec, vec({1, 2}), 0), stcomp::ConfigError);
}

TEST(UnbiasedLBits, EmpiricalMeanMatchesInput) {
  auto spec = make(CompressorKind::unbiased_lbits);
  spec.lbits = 3;
  stcomp::Rng rng(2024);
  const int draws = 10000;
  const double levels = 4.0;  // 2^(l-1)
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.normal() * std::pow(10.0, rng.uniform(-2, 2));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (int k = 0; k < draws; ++k) mean += compress(spec, x, 0, &rng).decoded;
    mean /= draws;
    const double scale = x.cwiseAbs().maxCoeff() / levels;
    for (int i = 0; i < 4; ++i) {
      // Each decoded coordinate is scale * Bernoulli-rounded level, so its
      // standard error is known in closed form; the additive term absorbs
      // float accumulation on deterministic coordinates.
      const double y = levels * std::abs(x(i)) / x.cwiseAbs().maxCoeff();
      const double frac = y - std::floor(y);
      const double sem = scale * std::sqrt(frac * (1.0 - frac) / draws);
      ASSERT_NEAR(mean(i), x(i), 3.0 * sem + 1e-9 * (1.0 + std::abs(x(i))))
          << "coordinate " << i << " of repetition " << rep;
    }
  }
}

TEST(AllKinds, ZeroMapsToZero) {
  stcomp::Rng rng(8);
  for (auto kind :
       {CompressorKind::identity, CompressorKind::scalarization, CompressorKind::topk,
        CompressorKind::uniform_quantizer, CompressorKind::saturated_quantizer,
        CompressorKind::scaled_floor, CompressorKind::unbiased_lbits}) {
    auto spec = make(kind);
    for (int rep = 0; rep < 1000; ++rep) {
      const int d = 1 + static_cast<int>(rng.below(6));
      spec.k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
      spec.delta = rng.uniform(0.1, 3.0);
      spec.gamma_e = rng.uniform(0.4, 0.99);
      spec.lbits = 1 + static_cast<int>(rng.below(8));
      const long t = static_cast<long>(rng.below(1000));
      const auto out = compress(spec, Eigen::VectorXd::Zero(d), t, &rng).decoded;
      ASSERT_EQ(out, Eigen::VectorXd::Zero(d)) << stcomp::kind_name(kind);
    }
  }
}

// Linear bound at the origin: ||C(x,t)|| <= L_c ||x|| with the per-kind L_c.
TEST(AllKinds, LinearBoundAtOrigin) {
  stcomp::Rng rng(21);
  const int d = 5;
  struct Case {
    CompressorKind kind;
    double lc;
  };
  const Case cases[] = {
      {CompressorKind::identity, 1.0},
      {CompressorKind::scalarization, 1.0},
      {CompressorKind::topk, 1.0},
      {CompressorKind::uniform_quantizer, double(d)},  // 2p with p = d/2
      {CompressorKind::saturated_quantizer, 1.0},
      {CompressorKind::scaled_floor, 1.0},
  };
  for (const auto& c : cases) {
    auto spec = make(c.kind);
    spec.k = 2;
    for (int rep = 0; rep < 2000; ++rep) {
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x(i) = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
      const long t = static_cast<long>(rng.below(200));
      const auto out = compress(spec, x, t).decoded;
      ASSERT_LE(out.norm(), c.lc * x.norm() + 1e-12) << stcomp::kind_name(c.kind);
    }
  }
  // Stochastic kind: per-draw bound ||C(x)|| <= (1 + sqrt(d)/2^(l-1)) ||x||.
  auto lbits = make(CompressorKind::unbiased_lbits);
  lbits.lbits = 4;
  const double lc = 1.0 + std::sqrt(double(d)) / 8.0;
  for (int rep = 0; rep < 2000; ++rep) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
    const auto out = compress(lbits, x, 0, &rng).decoded;
    ASSERT_LE(out.norm(), lc * x.norm() + 1e-12);
  }
}

TEST(Compress, RejectsNonFiniteInput) {
  const auto spec = make(CompressorKind::identity);
  Eigen::VectorXd x(2);
  x << 1.0, std::nan("");
  EXPECT_THROW(compress(spec, x, 0), stcomp::NumericError);
  x << 1.0, std::numeric_limits<double>::infinity();
  EXPECT_THROW(compress(spec, x, 0), stcomp::NumericError);
}

TEST(ByteCost, DefaultModelMatchesCatalog) {
  const int d = 5;
  EXPECT_EQ(byte_cost(make(CompressorKind::identity), d), 40);
  EXPECT_EQ(byte_cost(make(CompressorKind::scalarization), d), 8);
  auto topk = make(CompressorKind::topk);
  topk.k = 2;
  EXPECT_EQ(byte_cost(topk, d), 16);
  EXPECT_EQ(byte_cost(make(CompressorKind::uniform_quantizer), d), 9);
  EXPECT_EQ(byte_cost(make(CompressorKind::unbiased_lbits), d), 20);
}

TEST(ByteCost, OverrideWins) {
  auto spec = make(CompressorKind::unbiased_lbits);
  spec.byte_cost_override = 20;
  EXPECT_EQ(byte_cost(spec, 5), 20);
  spec.byte_cost_override = 33;
  EXPECT_EQ(byte_cost(spec, 5), 33);
}

TEST(ByteCost, IndependentOfValue) {
  stcomp::Rng rng(5);
  for (auto kind :
       {CompressorKind::identity, CompressorKind::scalarization, CompressorKind::topk,
        CompressorKind::uniform_quantizer, CompressorKind::saturated_quantizer,
        CompressorKind::scaled_floor, CompressorKind::unbiased_lbits}) {
    auto spec = make(kind);
    const int d = 6;
    const auto expected = byte_cost(spec, d);
    for (int rep = 0; rep < 1000; ++rep) {
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x(i) = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
      ASSERT_EQ(compress(spec, x, 0, &rng).byte_cost, expected);
    }
  }
}

TEST(ByteCost, SignBitsPackToWholeBytes) {
  const auto spec = make(CompressorKind::uniform_quantizer);
  EXPECT_EQ(byte_cost(spec, 1), 9);
  EXPECT_EQ(byte_cost(spec, 8), 9);
  EXPECT_EQ(byte_cost(spec, 9), 10);
  EXPECT_EQ(byte_cost(spec, 16), 10);
}

}  // namespace
