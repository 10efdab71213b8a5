#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "pai/errors.hpp"
#include "pai/net.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

pai::NetSpec small_spec(std::size_t depth, pai::ActivationKind k, bool bias = false) {
  const pai::Activation act(k);
  return depth == 1 ? pai::NetSpec::one_hidden(5, 4, act, bias) : pai::NetSpec::two_hidden(5, 4, 3, act, bias);
}

VectorXd random_x(std::size_t d, std::uint64_t seed) {
  pai::Rng64 r(seed);
  VectorXd x(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = r.normal();
  return x;
}

std::vector<pai::Mask> random_masks(const pai::NetSpec& spec, std::uint64_t seed) {
  pai::Rng64 r(seed);
  std::vector<pai::Mask> out;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    pai::Mask m = pai::Mask::ones(spec.widths[l], spec.widths[l + 1]);
    for (Eigen::Index k = 0; k < m.entries.size(); ++k) m.entries.data()[k] = r.bernoulli(0.6);
    out.push_back(std::move(m));
  }
  return out;
}

TEST(NetSpec, Validation) {
  EXPECT_NO_THROW(small_spec(2, pai::ActivationKind::Tanh).validate());
  pai::NetSpec bad;
  bad.widths = {3, 1};
  EXPECT_THROW(bad.validate(), pai::ArgumentError);
  bad.widths = {3, 4, 2};
  EXPECT_THROW(bad.validate(), pai::ArgumentError);
  bad.widths = {3, 0, 1};
  EXPECT_THROW(bad.validate(), pai::ArgumentError);
}

TEST(Forward, HandComputedOneHidden) {
  const auto spec = pai::NetSpec::one_hidden(2, 2, pai::Activation(pai::ActivationKind::Tanh));
  pai::NetParams p = pai::NetParams::zeros(spec);
  p.weights[0] << 1, 2, 3, 4;
  p.output << 1, 2;
  VectorXd x(2);
  x << 1, -1;
  const double h0 = (1.0 - 3.0) / std::sqrt(2.0), h1 = (2.0 - 4.0) / std::sqrt(2.0);
  const double expected = (std::tanh(h0) + 2.0 * std::tanh(h1)) / std::sqrt(2.0);
  const auto r = pai::forward(spec, p, {}, x);
  EXPECT_NEAR(r.output, expected, 1e-15);
  EXPECT_NEAR(r.pre[0][0], h0, 1e-15);
}

TEST(Forward, MaskedEntriesAreIgnored) {
  const auto spec = small_spec(2, pai::ActivationKind::Tanh);
  pai::Rng64 r(1);
  pai::NetParams p = pai::NetParams::sample(spec, r);
  const auto masks = random_masks(spec, 2);
  const VectorXd x = random_x(5, 3);
  pai::NetParams perturbed = p;
  for (std::size_t l = 0; l < 2; ++l)
    for (Eigen::Index k = 0; k < masks[l].entries.size(); ++k)
      if (!masks[l].entries.data()[k]) perturbed.weights[l].data()[k] += 10.0;
  EXPECT_DOUBLE_EQ(pai::forward(spec, p, masks, x).output, pai::forward(spec, perturbed, masks, x).output);
}

TEST(Params, SampleIsDeterministic) {
  const auto spec = small_spec(2, pai::ActivationKind::ReLU, true);
  pai::Rng64 a(9), b(9);
  const auto pa = pai::NetParams::sample(spec, a), pb = pai::NetParams::sample(spec, b);
  EXPECT_EQ(pa.flatten(), pb.flatten());
  EXPECT_EQ(pa.size(), 5u * 4 + 4 * 3 + 3 + 4 + 3);
  EXPECT_EQ(pa.biases[0].squaredNorm(), 0.0);
}

// Central differences of the scalar output with respect to every parameter.
VectorXd numeric_output_gradient(const pai::NetSpec& spec, const pai::NetParams& p,
                                 const std::vector<pai::Mask>& masks, const VectorXd& x) {
  const double h = 1e-6;
  std::vector<double> out;
  auto probe = [&](double& slot) {
    const double keep = slot;
    slot = keep + h;
    const double fp = pai::forward(spec, p, masks, x).output;
    slot = keep - h;
    const double fm = pai::forward(spec, p, masks, x).output;
    slot = keep;
    out.push_back((fp - fm) / (2 * h));
  };
  auto& q = const_cast<pai::NetParams&>(p);
  for (auto& w : q.weights)
    for (Eigen::Index k = 0; k < w.size(); ++k) probe(w.data()[k]);
  for (Eigen::Index k = 0; k < q.output.size(); ++k) probe(q.output[k]);
  for (auto& b : q.biases)
    for (Eigen::Index k = 0; k < b.size(); ++k) probe(b[k]);
  return Eigen::Map<VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

using NetCase = std::tuple<std::size_t, pai::ActivationKind, bool>;

std::string case_name(const ::testing::TestParamInfo<NetCase>& info) {
  const auto& [depth, kind, bias] = info.param;
  return "depth" + std::to_string(depth) + "_" + std::string(pai::Activation(kind).name()) + (bias ? "_bias" : "");
}

class GradientCase : public ::testing::TestWithParam<NetCase> {};

TEST_P(GradientCase, MatchesFiniteDifferences) {
  const auto [depth, kind, bias] = GetParam();
  const auto spec = small_spec(depth, kind, bias);
  pai::Rng64 r(21);
  pai::NetParams p = pai::NetParams::sample(spec, r);
  if (bias)
    for (auto& b : p.biases) b.setConstant(0.3);
  const auto masks = random_masks(spec, 22);
  const VectorXd x = random_x(5, 23);
  const auto g = pai::output_gradient(spec, pai::apply_masks(spec, p, masks), masks, x).flatten();
  const VectorXd fd = numeric_output_gradient(spec, p, masks, x);
  ASSERT_EQ(g.size(), fd.size());
  EXPECT_LE((g - fd).cwiseAbs().maxCoeff(), 1e-7 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
}

INSTANTIATE_TEST_SUITE_P(Nets, GradientCase,
                         ::testing::Values(std::make_tuple(1, pai::ActivationKind::Tanh, false),
                                           std::make_tuple(1, pai::ActivationKind::Sigmoid, true),
                                           std::make_tuple(2, pai::ActivationKind::Tanh, false),
                                           std::make_tuple(2, pai::ActivationKind::Sigmoid, true)),
                         case_name);

TEST(Gradient, LossGradientIsDeltaTimesOutputGradient) {
  const auto spec = small_spec(1, pai::ActivationKind::Tanh);
  pai::Rng64 r(31);
  const auto p = pai::NetParams::sample(spec, r);
  const VectorXd x = random_x(5, 32);
  const double f = pai::forward(spec, p, {}, x).output;
  const auto g = pai::grad_params(spec, p, {}, x, 0.7).flatten();
  const auto j = pai::output_gradient(spec, p, {}, x).flatten();
  EXPECT_LE((g - (f - 0.7) * j).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hvp, MatchesExactHessianOfSmallNet) {
  // Exact Hessian of L = (f - y)^2 / 2 by second differences of the loss.
  const auto spec = pai::NetSpec::one_hidden(2, 2, pai::Activation(pai::ActivationKind::Tanh));
  pai::Rng64 r(41);
  pai::NetParams p = pai::NetParams::sample(spec, r);
  const VectorXd x = random_x(2, 42);
  const double y = 0.4;
  pai::NetParams dir = pai::NetParams::zeros(spec);
  dir.weights[0] << 0.3, -0.2, 0.5, 0.1;
  dir.output << -0.4, 0.2;
  const VectorXd hv = pai::hvp(spec, p, x, y, dir).flatten();

  auto loss = [&](const pai::NetParams& q) {
    const double f = pai::forward(spec, q, {}, x).output;
    return 0.5 * (f - y) * (f - y);
  };
  // (H v)_k = d/dt d/de_k L(p + t v) via mixed central differences.
  const double h = 1e-4;
  VectorXd oracle(hv.size());
  for (Eigen::Index k = 0; k < hv.size(); ++k) {
    auto at = [&](double t, double e) {
      pai::NetParams q = p;
      q.axpy(t, dir);
      if (k < 4)
        q.weights[0].data()[k] += e;
      else
        q.output[k - 4] += e;
      return loss(q);
    };
    oracle[k] = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
  }
  EXPECT_LE((hv - oracle).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Hvp, DeepNetworksAreRejected) {
  const auto spec = small_spec(2, pai::ActivationKind::Tanh);
  const auto p = pai::NetParams::zeros(spec);
  EXPECT_THROW(pai::hvp(spec, p, random_x(5, 1), 0.0, p), pai::FeatureError);
}

TEST(Activation, DerivativesMatchFiniteDifferences) {
  for (auto kind : {pai::ActivationKind::Tanh, pai::ActivationKind::Sigmoid}) {
    const pai::Activation a(kind);
    for (double z = -4.0; z <= 4.0; z += 0.37) {
      EXPECT_NEAR(a.d1(z), (a.value(z + 1e-6) - a.value(z - 1e-6)) / 2e-6, 1e-8);
      EXPECT_NEAR(a.d2(z), (a.d1(z + 1e-6) - a.d1(z - 1e-6)) / 2e-6, 1e-8);
    }
  }
  const pai::Activation relu(pai::ActivationKind::ReLU);
  EXPECT_EQ(relu.d1(0.0), 0.0);
  EXPECT_EQ(relu.d1(2.0), 1.0);
  EXPECT_EQ(relu.d2(2.0), 0.0);
  EXPECT_EQ(pai::Activation::parse("sigmoid").kind(), pai::ActivationKind::Sigmoid);
  EXPECT_THROW(pai::Activation::parse("gelu"), pai::ArgumentError);
}

}  // namespace
