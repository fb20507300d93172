#include "stcomp/certify.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using stcomp::certify_contraction;
using stcomp::certify_induced_decay;
using stcomp::certify_pe;
using stcomp::CompressorKind;
using stcomp::CompressorSpec;
using stcomp::estimate_delta;
using stcomp::ExcitationSchedule;

CompressorSpec make(CompressorKind kind) {
  CompressorSpec spec;
  spec.kind = kind;
  return spec;
}

TEST(InducedDecay, IdentityHalvesExactly) {
  stcomp::Rng rng(1);
  const auto report = certify_induced_decay(make(CompressorKind::identity), 0.5, 4, 20, 200, rng);
  EXPECT_EQ(report.violations, 0);
  ASSERT_TRUE(report.decay_rate.has_value());
  EXPECT_NEAR(*report.decay_rate, 0.5, 1e-9);
  EXPECT_GT(report.r2, 1.0 - 1e-12);
  EXPECT_NEAR(report.lipschitz_estimate, 1.0, 1e-12);
}

TEST(InducedDecay, ScalarizationDampsEveryCycle) {
  // Each coordinate shrinks by (1 - kappa0) once per d rounds, so the
  // envelope factor is (1 - kappa0)^(1/d).
  stcomp::Rng rng(2);
  const auto report =
      certify_induced_decay(make(CompressorKind::scalarization), 0.5, 3, 30, 300, rng);
  EXPECT_EQ(report.violations, 0);
  ASSERT_TRUE(report.decay_rate.has_value());
  EXPECT_LT(*report.decay_rate, 1.0);
  EXPECT_NEAR(*report.decay_rate, std::pow(0.5, 1.0 / 3.0), 1e-6);
}

TEST(InducedDecay, UniformQuantizerAtInversePGain) {
  const int d = 6;
  stcomp::Rng rng(3);
  const auto report = certify_induced_decay(make(CompressorKind::uniform_quantizer),
                                            2.0 / d, d, 20, 200, rng);
  EXPECT_EQ(report.violations, 0);
}

TEST(InducedDecay, IdentityDivergesBeyondTwo) {
  stcomp::Rng rng(4);
  const auto report = certify_induced_decay(make(CompressorKind::identity), 3.0, 3, 20, 100, rng);
  EXPECT_EQ(report.violations, 20);  // |1 - kappa0| = 2 > 1 for every trajectory
}

TEST(InducedDecay, StochasticMeanSquareMode) {
  auto spec = make(CompressorKind::unbiased_lbits);
  spec.lbits = 4;
  stcomp::Rng rng(5);
  const auto report = certify_induced_decay(spec, 0.5, 5, 50, 400, rng);
  EXPECT_EQ(report.violations, 0);
  ASSERT_TRUE(report.decay_rate.has_value());
  EXPECT_LT(*report.decay_rate, 1.0);
}

TEST(InducedDecay, PreconditionsEnforced) {
  stcomp::Rng rng(6);
  EXPECT_THROW(certify_induced_decay(make(CompressorKind::identity), 0.5, 3, 5, 100, rng),
               stcomp::ConfigError);
  EXPECT_THROW(certify_induced_decay(make(CompressorKind::identity), 0.5, 3, 20, 10, rng),
               stcomp::ConfigError);
}

TEST(Contraction, TopKExampleParameters) {
  auto spec = make(CompressorKind::topk);
  spec.k = 2;
  stcomp::Rng rng(7);
  const auto report = certify_contraction(spec, 1.0, 2.0 / 5.0, 20000, 5, rng);
  EXPECT_EQ(report.violations, 0);
}

TEST(Contraction, UniformQuantizerExampleParameters) {
  stcomp::Rng rng(8);
  const auto report =
      certify_contraction(make(CompressorKind::uniform_quantizer), 5.0 / 2.0, 1.0 / 25.0, 20000, 5, rng);
  EXPECT_EQ(report.violations, 0);
}

TEST(Contraction, SaturatedQuantizerThreeQuarters) {
  auto spec = make(CompressorKind::saturated_quantizer);
  spec.delta = 1.0;
  stcomp::Rng rng(9);
  const auto report = certify_contraction(spec, 1.0, 0.75, 20000, 5, rng);
  EXPECT_EQ(report.violations, 0);
}

TEST(Contraction, ZeroVectorHoldsWithEquality) {
  auto spec = make(CompressorKind::topk);
  spec.k = 1;
  const auto msg = stcomp::compress(spec, Eigen::VectorXd::Zero(3), 0);
  EXPECT_EQ((msg.decoded / 1.0 - Eigen::VectorXd::Zero(3)).squaredNorm(), 0.0);
}

TEST(Contraction, DetectsWrongPhi) {
  // Top-1 of a flat vector keeps 1/d of the energy; phi close to 1 must fail.
  auto spec = make(CompressorKind::topk);
  spec.k = 1;
  stcomp::Rng rng(10);
  const auto report = certify_contraction(spec, 1.0, 0.99, 2000, 5, rng);
  EXPECT_GT(report.violations, 0);
}

TEST(Contraction, StochasticExpectationVariant) {
  auto spec = make(CompressorKind::unbiased_lbits);
  spec.lbits = 4;
  stcomp::Rng rng(11);
  // E||C(x) - x||^2 <= (d/4^l) ||x||^2, comfortably within phi = 1/2 at l=4.
  const auto report = stcomp::certify_contraction_expectation(spec, 1.0, 0.5, 500, 200, 5, rng);
  EXPECT_EQ(report.violations, 0);
  // Deterministic entry point refuses stochastic kinds.
  EXPECT_THROW(certify_contraction(spec, 1.0, 0.5, 10, 5, rng), stcomp::ConfigError);
}

TEST(PersistenceOfExcitation, CyclingBasisWindows) {
  const int d = 4;
  {
    const auto [a1, a2] = certify_pe(ExcitationSchedule::cycling_basis, d, d, 50);
    EXPECT_NEAR(a1, 1.0, 1e-12);
    EXPECT_NEAR(a2, 1.0, 1e-12);
  }
  {
    const auto [a1, a2] = certify_pe(ExcitationSchedule::cycling_basis, 2 * d, d, 50);
    EXPECT_NEAR(a1, 2.0, 1e-12);
    EXPECT_NEAR(a2, 2.0, 1e-12);
  }
  {
    const auto [a1, a2] = certify_pe(ExcitationSchedule::cycling_basis, 1, d, 50);
    EXPECT_NEAR(a1, 0.0, 1e-12);  // rank-1 window is not persistently exciting
    EXPECT_NEAR(a2, 1.0, 1e-12);
  }
  // Window not a multiple of d: counts differ by one across coordinates.
  {
    const auto [a1, a2] = certify_pe(ExcitationSchedule::cycling_basis, d + 1, d, 50);
    EXPECT_NEAR(a1, 1.0, 1e-12);
    EXPECT_NEAR(a2, 2.0, 1e-12);
  }
}

TEST(EstimateDelta, LinearKindsCommute) {
  const auto sp = stcomp::spectrum(stcomp::build_ring(10, 1.0));
  stcomp::Rng rng(12);
  EXPECT_LE(estimate_delta(make(CompressorKind::identity), sp, 5, 500, rng), 1e-12);
  EXPECT_LE(estimate_delta(make(CompressorKind::scalarization), sp, 5, 500, rng), 1e-10);
}

TEST(EstimateDelta, TopOneDoesNot) {
  const auto sp = stcomp::spectrum(stcomp::build_ring(3, 1.0));
  auto spec = make(CompressorKind::topk);
  spec.k = 1;
  stcomp::Rng rng(13);
  EXPECT_GT(estimate_delta(spec, sp, 2, 2000, rng), 1e-3);
}

TEST(EstimateDelta, StochasticKindsRejected) {
  const auto sp = stcomp::spectrum(stcomp::build_ring(4, 1.0));
  stcomp::Rng rng(14);
  EXPECT_THROW(estimate_delta(make(CompressorKind::unbiased_lbits), sp, 3, 10, rng),
               stcomp::ConfigError);
}

TEST(Report, SerializesToJson) {
  stcomp::Rng rng(15);
  const auto report = certify_induced_decay(make(CompressorKind::identity), 0.5, 3, 20, 100, rng);
  const auto j = stcomp::to_json(report);
  EXPECT_TRUE(j.contains("decay_rate"));
  EXPECT_EQ(j.at("violations").get<std::int64_t>(), 0);
  EXPECT_EQ(j.at("samples").get<std::int64_t>(), 20);
}

}  // namespace
