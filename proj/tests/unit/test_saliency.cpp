#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pai/errors.hpp"
#include "pai/saliency.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Setup {
  pai::NetSpec spec;
  pai::NetParams params;
  VectorXd x;
};

Setup make(std::size_t d, std::size_t n, pai::ActivationKind k, std::uint64_t seed, std::size_t depth = 1) {
  Setup s;
  const pai::Activation act(k);
  s.spec = depth == 1 ? pai::NetSpec::one_hidden(d, n, act) : pai::NetSpec::two_hidden(d, n, n, act);
  pai::Rng64 r(seed);
  s.params = pai::NetParams::sample(s.spec, r);
  s.x.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < s.x.size(); ++i) s.x[i] = r.normal();
  return s;
}

// max/min of a / b over entries where b is not tiny: 1 means a is b times a constant.
double proportionality_spread(const MatrixXd& a, const MatrixXd& b) {
  double lo = 1e300, hi = -1e300;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (std::fabs(b.data()[k]) < 1e-12) continue;
    const double r = a.data()[k] / b.data()[k];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return hi / lo;
}

TEST(Snip, FactorsReproduceConnectionSensitivity) {
  const auto s = make(12, 9, pai::ActivationKind::Tanh, 1);
  const double y = 0.3;
  const auto f = pai::snip_scores(s.spec, s.params, s.x, y);
  const MatrixXd direct =
      s.params.weights[0].cwiseProduct(pai::grad_params(s.spec, s.params, {}, s.x, y).weights[0]).cwiseAbs();
  EXPECT_NEAR(proportionality_spread(direct, f.magnitude()), 1.0, 1e-12);
  EXPECT_EQ(f.phi, s.x.cwiseAbs());
}

TEST(Snip, DeepLayersReproduceConnectionSensitivity) {
  const auto s = make(10, 8, pai::ActivationKind::Sigmoid, 2, 2);
  pai::Rng64 r(0);
  const auto factors = pai::layer_scores(pai::PaiMethod::Snip, s.spec, s.params, s.x, 0.5, r);
  const auto g = pai::grad_params(s.spec, s.params, {}, s.x, 0.5);
  ASSERT_EQ(factors.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    const MatrixXd direct = s.params.weights[l].cwiseProduct(g.weights[l]).cwiseAbs();
    EXPECT_NEAR(proportionality_spread(direct, factors[l].magnitude()), 1.0, 1e-12) << "layer " << l;
  }
}

TEST(Snip, ZeroResidualGivesZeroScores) {
  const auto s = make(6, 5, pai::ActivationKind::Tanh, 3);
  const double f = pai::forward(s.spec, s.params, {}, s.x).output;
  EXPECT_EQ(pai::snip_scores(s.spec, s.params, s.x, f).magnitude().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(pai::grasp_scores(s.spec, s.params, s.x, f, pai::GraspVariant::Magnitude).magnitude().cwiseAbs().maxCoeff(),
            0.0);
}

TEST(Synflow, OneLayerScoreIsThetaTimesOutput) {
  const auto s = make(7, 6, pai::ActivationKind::ReLU, 4);
  const auto f = pai::synflow_scores(s.spec, s.params);
  MatrixXd direct = s.params.weights[0].cwiseAbs();
  for (Eigen::Index j = 0; j < direct.cols(); ++j) direct.col(j) *= std::fabs(s.params.output[j]);
  EXPECT_NEAR(proportionality_spread(direct, f.magnitude()), 1.0, 1e-12);
}

TEST(Grasp, DecompositionMatchesFiniteDifferenceHvp) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto s = make(16, 16, pai::ActivationKind::Tanh, seed);
    const auto dec = pai::grasp_decomposition(s.spec, s.params, s.x, 0.2);
    EXPECT_LE((dec.hg - (dec.c_n * dec.gradient + dec.remainder)).cwiseAbs().maxCoeff(), 1e-14);
    pai::NetParams dir = pai::NetParams::zeros(s.spec);
    dir.weights[0] = pai::grad_params(s.spec, s.params, {}, s.x, 0.2).weights[0];
    const MatrixXd oracle = pai::hvp(s.spec, s.params, s.x, 0.2, dir).weights[0];
    EXPECT_LE((dec.hg - oracle).cwiseAbs().maxCoeff() / dec.hg.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Grasp, ReluRemainderVanishes) {
  const auto s = make(20, 20, pai::ActivationKind::ReLU, 5);
  const auto dec = pai::grasp_decomposition(s.spec, s.params, s.x, -0.4);
  EXPECT_EQ(dec.remainder.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Grasp, AnalyticAndOraclePathsAgree) {
  const auto s = make(12, 10, pai::ActivationKind::Tanh, 6);
  const auto a = pai::grasp_scores(s.spec, s.params, s.x, 0.1, pai::GraspVariant::Signed, pai::HessianPath::Analytic);
  const auto o = pai::grasp_scores(s.spec, s.params, s.x, 0.1, pai::GraspVariant::Signed, pai::HessianPath::HvpOracle);
  EXPECT_LE((a.magnitude() - o.magnitude()).cwiseAbs().maxCoeff() / a.magnitude().cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((*a.signed_score - *o.signed_score).cwiseAbs().maxCoeff() / a.signed_score->cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Grasp, MagnitudeFactorsReproduceScore) {
  const auto s = make(9, 8, pai::ActivationKind::Sigmoid, 7);
  const auto f = pai::grasp_scores(s.spec, s.params, s.x, 0.9, pai::GraspVariant::Magnitude);
  const auto dec = pai::grasp_decomposition(s.spec, s.params, s.x, 0.9);
  const MatrixXd direct = s.params.weights[0].cwiseProduct(dec.hg).cwiseAbs();
  EXPECT_NEAR(proportionality_spread(direct, f.magnitude()), 1.0, 1e-10);
}

TEST(Grasp, ReluMagnitudeMaskEqualsSnipMask) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto s = make(64, 64, pai::ActivationKind::ReLU, 100 + seed);
    pai::Rng64 t1(1), t2(1);
    const auto m1 = pai::make_mask(pai::snip_scores(s.spec, s.params, s.x, 0.0), 0.2, t1);
    const auto m2 =
        pai::make_mask(pai::grasp_scores(s.spec, s.params, s.x, 0.0, pai::GraspVariant::Magnitude), 0.2, t2);
    EXPECT_TRUE(m1.entries == m2.entries);
  }
}

TEST(MakeMask, KeepsExactlyTopK) {
  pai::Rng64 r(8);
  const auto f = pai::random_scores(13, 11, r);
  for (double rho : {0.05, 0.2, 0.5, 0.999, 1.0}) {
    pai::Rng64 tie(9);
    const auto m = pai::make_mask(f, rho, tie);
    const std::size_t k = static_cast<std::size_t>(std::floor(rho * 143 + 1e-9));
    EXPECT_EQ(m.popcount(), k);
    const MatrixXd s = f.ranking_score();
    double min_kept = 1e300, max_dropped = -1e300;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      (m.entries.data()[i] ? min_kept : max_dropped) =
          m.entries.data()[i] ? std::min(min_kept, s.data()[i]) : std::max(max_dropped, s.data()[i]);
    EXPECT_GE(min_kept, max_dropped);
  }
}

TEST(MakeMask, TiesAreBrokenByTheRng) {
  pai::SaliencyFactors f{VectorXd::Ones(10), VectorXd::Ones(10), MatrixXd::Ones(10, 10), std::nullopt};
  pai::Rng64 a(1), b(1), c(2);
  const auto ma = pai::make_mask(f, 0.3, a), mb = pai::make_mask(f, 0.3, b), mc = pai::make_mask(f, 0.3, c);
  EXPECT_EQ(ma.popcount(), 30u);
  EXPECT_TRUE(ma.entries == mb.entries);
  EXPECT_FALSE(ma.entries == mc.entries);
}

TEST(MakeMask, EmptySelectionIsRejected) {
  pai::Rng64 r(1);
  const auto f = pai::random_scores(3, 3, r);
  EXPECT_THROW(pai::make_mask(f, 0.05, r), pai::ArgumentError);
}

TEST(MakeMask, SignedRuleRanksSignedScore) {
  pai::SaliencyFactors f{VectorXd::Ones(2), VectorXd::Ones(2), MatrixXd::Ones(2, 2), std::nullopt};
  MatrixXd signed_score(2, 2);
  signed_score << -5, 1, 2, -1;
  f.signed_score = signed_score;
  pai::Rng64 r(1);
  const auto m = pai::make_mask(f, 0.5, r);
  EXPECT_TRUE(m(1, 0));
  EXPECT_TRUE(m(0, 1));
  EXPECT_FALSE(m(0, 0));
}

TEST(SortedMask, OrdersRowsAndColumnsByFactors) {
  pai::Mask m = pai::Mask::ones(3, 2);
  m.entries << 1, 0, 0, 0, 1, 1;
  m.row_factors = VectorXd(3);
  m.row_factors << 2.0, 0.5, 1.0;
  m.col_factors = VectorXd(2);
  m.col_factors << 3.0, 1.0;
  MatrixXd expected(3, 2);
  // rows in order 1, 2, 0; columns in order 1, 0
  expected << 0, 0, 1, 1, 0, 1;
  EXPECT_EQ(pai::sorted_mask(m), expected);
}

TEST(RankCorrelation, KnownValues) {
  MatrixXd a(1, 5), b(1, 5), c(1, 5);
  a << 1, 2, 3, 4, 5;
  b << 5, 6, 7, 8, 7;
  c << 5, 4, 3, 2, 1;
  EXPECT_NEAR(pai::rank_correlation(a, a), 1.0, 1e-15);
  EXPECT_NEAR(pai::rank_correlation(a, c), -1.0, 1e-15);
  // scipy.stats.spearmanr([1,2,3,4,5],[5,6,7,8,7]) = 0.8207826816681233
  EXPECT_NEAR(pai::rank_correlation(a, b), 0.8207826816681233, 1e-12);
  EXPECT_THROW(pai::rank_correlation(a, MatrixXd::Ones(1, 5)), pai::ArgumentError);
}

TEST(EmpiricalGraphon, PreconditionsAndMass) {
  pai::GraphonExperiment e;
  e.method = pai::PaiMethod::Random;
  e.width = 64;
  e.grid = 16;
  e.seeds = 3;
  const auto g = pai::empirical_graphon(e, pai::Rng64(1));
  EXPECT_NEAR(g.probs.mean(), std::floor(0.2 * 64 * 64) / (64.0 * 64.0), 1e-15);
  e.grid = 128;
  EXPECT_THROW(pai::empirical_graphon(e, pai::Rng64(1)), pai::ArgumentError);
  e.grid = 16;
  e.seeds = 0;
  EXPECT_THROW(pai::empirical_graphon(e, pai::Rng64(1)), pai::ArgumentError);
}

TEST(EmpiricalGraphon, SnipIsMonotoneInBothCoordinates) {
  pai::GraphonExperiment e;
  e.method = pai::PaiMethod::Snip;
  e.width = 256;
  e.grid = 8;
  e.seeds = 10;
  const auto g = pai::empirical_graphon(e, pai::Rng64(3)).probs;
  for (std::size_t i = 0; i + 1 < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_LE(g(i, j), g(i + 1, j) + 0.02);
      EXPECT_LE(g(j, i), g(j, i + 1) + 0.02);
    }
}

TEST(EmpiricalGraphon, DeepGraspIsUnsupported) {
  pai::GraphonExperiment e;
  e.method = pai::PaiMethod::GraspMagnitude;
  e.width = 32;
  e.grid = 8;
  EXPECT_THROW(pai::empirical_graphon_deep(e, pai::Rng64(1)), pai::FeatureError);
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {pai::PaiMethod::Snip, pai::PaiMethod::GraspMagnitude, pai::PaiMethod::GraspSigned,
                 pai::PaiMethod::Synflow, pai::PaiMethod::Magnitude, pai::PaiMethod::Random})
    EXPECT_EQ(pai::parse_method(pai::method_name(m)), m);
  EXPECT_THROW(pai::parse_method("snap"), pai::ArgumentError);
}

}  // namespace
