#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pai/errors.hpp"
#include "pai/limit.hpp"
#include "pai/saliency.hpp"

namespace {

TEST(Link, ClosedForms) {
  auto m = pai::constant_model(pai::NoiseKind::HalfNormal).with_tau(1.0);
  EXPECT_NEAR(pai::link(m, 2.0), std::erfc(1.0 / (2.0 * std::sqrt(2.0))), 1e-15);
  EXPECT_EQ(pai::link(m, 0.0), 0.0);
  auto s = pai::constant_model(pai::NoiseKind::HalfNormal, pai::LinkKind::Signed).with_tau(1.0);
  EXPECT_NEAR(pai::link(s, 1.0), 0.15865525393145707, 1e-14);
  auto u = pai::constant_model(pai::NoiseKind::Uniform).with_tau(0.5);
  EXPECT_DOUBLE_EQ(pai::link(u, 2.0), 0.75);
  EXPECT_DOUBLE_EQ(pai::link(u, 0.25), 0.0);
  EXPECT_THROW(pai::link(u, -1.0), pai::ArgumentError);
  EXPECT_THROW(pai::link(pai::constant_model(pai::NoiseKind::Uniform), 1.0), pai::ArgumentError);
}

TEST(Threshold, ConstantUniformModel) {
  const auto m = pai::constant_model(pai::NoiseKind::Uniform);
  EXPECT_NEAR(pai::solve_threshold(m, 0.2, 16), 0.8, 1e-6);
}

TEST(Threshold, ConstantHalfNormalModel) {
  const auto m = pai::constant_model(pai::NoiseKind::HalfNormal);
  EXPECT_NEAR(pai::solve_threshold(m, 0.2, 16), 1.2815515655446004, 1e-5);
}

TEST(Threshold, SignedRuleCannotKeepMoreThanHalf) {
  const auto m = pai::constant_model(pai::NoiseKind::HalfNormal, pai::LinkKind::Signed);
  EXPECT_THROW(pai::solve_threshold(m, 0.6, 8), pai::NumericError);
  EXPECT_NEAR(pai::solve_threshold(m, 0.3, 8), 0.5244005127080407, 1e-5);
  EXPECT_THROW(pai::solve_threshold(m, 1.0, 8), pai::ArgumentError);
}

TEST(Threshold, GridMeanMatchesDensity) {
  pai::Rng64 r(3);
  auto m = pai::snip_limit_model(pai::Activation(pai::ActivationKind::Tanh), 100000, r);
  for (double rho : {0.05, 0.2, 0.5}) {
    const double tau = pai::solve_threshold(m, rho, 64);
    EXPECT_NEAR(pai::evaluate_grid(m.with_tau(tau), 64).mean(), rho, 1e-6);
  }
}

// The limit density at tau equals the fraction of raw SNIP products
// |x| |a| |sigma'(h)| |theta| above tau for independent standard normals.
TEST(SnipLimit, ThresholdMatchesMonteCarloOfScores) {
  pai::Rng64 table_rng(4);
  auto m = pai::snip_limit_model(pai::Activation(pai::ActivationKind::Tanh), 400000, table_rng);
  const double tau = pai::solve_threshold(m, 0.2, 512);
  pai::Rng64 r(5);
  const int n = 400000;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(), a = r.normal(), h = r.normal(), th = r.normal();
    const double t = std::tanh(h);
    above += std::fabs(x) * std::fabs(a) * (1.0 - t * t) * std::fabs(th) > tau;
  }
  EXPECT_NEAR(static_cast<double>(above) / n, 0.2, 0.005);
}

TEST(SnipLimit, GridIsMonotone) {
  pai::Rng64 r(6);
  auto m = pai::snip_limit_model(pai::Activation(pai::ActivationKind::ReLU), 50000, r);
  const auto g = pai::evaluate_grid(m.with_tau(pai::solve_threshold(m, 0.2, 32)), 32);
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j + 1 < 32; ++j) {
      EXPECT_LE(g(i, j), g(i, j + 1));
      EXPECT_LE(g(j, i), g(j + 1, i));
    }
  EXPECT_GE(g.min(), 0.0);
  EXPECT_LE(g.max(), 1.0);
}

TEST(SnipLimit, PhiIsHalfNormalQuantile) {
  pai::Rng64 r(7);
  auto m = pai::snip_limit_model(pai::Activation(pai::ActivationKind::Tanh), 1000, r);
  EXPECT_NEAR(m.phi_profile(0.5), 0.6744897501960817, 1e-12);
}

TEST(DeepModel, SecondLayerPhiIsQuantileOfActivation) {
  pai::Rng64 r(8);
  auto m = pai::deep_layer2_model(pai::Activation(pai::ActivationKind::ReLU), 200000, r);
  // |relu(Z)| has an atom of mass 1/2 at 0 and median of the positive half at the 3/4 normal quantile.
  EXPECT_NEAR(m.phi_profile(0.25), 0.0, 1e-12);
  EXPECT_NEAR(m.phi_profile(0.75), 0.6744897501960817, 0.01);
}

TEST(TheoreticalModel, RandomIsConstant) {
  pai::Rng64 r(9);
  auto m = pai::theoretical_model(pai::PaiMethod::Random, pai::Activation(), 1000, r);
  const auto g = pai::evaluate_grid(m.with_tau(pai::solve_threshold(m, 0.3, 8)), 8);
  EXPECT_NEAR(g.max() - g.min(), 0.0, 1e-12);
  EXPECT_NEAR(g.mean(), 0.3, 1e-6);
}

TEST(Grid, PartitionAndPooling) {
  const auto blocks = pai::partition_blocks(10, 3);
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(blocks[0].end - blocks[0].begin, 4u);
  EXPECT_EQ(blocks[2].end, 10u);
  Eigen::MatrixXd p(4, 4);
  p << 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 2, 2, 0, 0, 2, 4;
  const auto g = pai::pool_to_grid(p, 2);
  EXPECT_DOUBLE_EQ(g(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(g(1, 1), 2.5);
  EXPECT_THROW(pai::pool_to_grid(p, 5), pai::ArgumentError);
}

}  // namespace
