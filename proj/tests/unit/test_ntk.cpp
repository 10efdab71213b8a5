#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "pai/dataset.hpp"
#include "pai/errors.hpp"
#include "pai/ntk.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  pai::Rng64 g(seed);
  MatrixXd m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g.normal();
  return m;
}

std::vector<pai::Mask> bernoulli_masks(const pai::NetSpec& spec, double p, std::uint64_t seed) {
  pai::Rng64 r(seed);
  std::vector<pai::Mask> out;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    pai::Mask m = pai::Mask::ones(spec.widths[l], spec.widths[l + 1]);
    for (Eigen::Index k = 0; k < m.entries.size(); ++k) m.entries.data()[k] = r.bernoulli(p);
    out.push_back(std::move(m));
  }
  return out;
}

// K = J J^T with J assembled row by row from the parameter gradient.
MatrixXd brute_force_gram(const pai::NetSpec& spec, const pai::NetParams& p, const std::vector<pai::Mask>& masks,
                          const MatrixXd& X) {
  const auto eff = pai::apply_masks(spec, p, masks);
  MatrixXd J(X.rows(), static_cast<Eigen::Index>(p.size()));
  for (Eigen::Index s = 0; s < X.rows(); ++s)
    J.row(s) = pai::output_gradient(spec, eff, masks, X.row(s).transpose()).flatten().transpose();
  return J * J.transpose();
}

double rel_diff(const MatrixXd& a, const MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

TEST(NtkGram, MatchesJacobianProductDeepWithBias) {
  const auto spec = pai::NetSpec::two_hidden(6, 9, 7, pai::Activation(pai::ActivationKind::Tanh), true);
  pai::Rng64 r(1);
  auto p = pai::NetParams::sample(spec, r);
  for (auto& b : p.biases) b.setConstant(-0.2);
  const auto masks = bernoulli_masks(spec, 0.4, 2);
  const MatrixXd X = random_matrix(11, 6, 3);
  EXPECT_LE(rel_diff(pai::ntk_gram(spec, p, masks, X).K, brute_force_gram(spec, p, masks, X)), 1e-12);
}

TEST(NtkGram, MatchesJacobianProductShallowRelu) {
  const auto spec = pai::NetSpec::one_hidden(5, 13, pai::Activation(pai::ActivationKind::ReLU));
  pai::Rng64 r(4);
  const auto p = pai::NetParams::sample(spec, r);
  const MatrixXd X = random_matrix(8, 5, 5);
  EXPECT_LE(rel_diff(pai::ntk_gram(spec, p, {}, X).K, brute_force_gram(spec, p, {}, X)), 1e-12);
}

TEST(NtkGram, ClosedFormAgreesWithGeneric) {
  const auto spec = pai::NetSpec::one_hidden(10, 30, pai::Activation(pai::ActivationKind::Sigmoid));
  pai::Rng64 r(6);
  const auto p = pai::NetParams::sample(spec, r);
  const auto masks = bernoulli_masks(spec, 0.3, 7);
  const MatrixXd X = random_matrix(9, 10, 8);
  EXPECT_LE(rel_diff(pai::ntk_gram_one_hidden(spec, p, &masks[0], X).K, pai::ntk_gram(spec, p, masks, X).K), 1e-12);
  EXPECT_LE(rel_diff(pai::ntk_gram_one_hidden(spec, p, nullptr, X).K, pai::ntk_gram(spec, p, {}, X).K), 1e-12);
}

TEST(NtkGram, PermutingSamplesPermutesGram) {
  const auto spec = pai::NetSpec::two_hidden(4, 8, 8, pai::Activation(pai::ActivationKind::Tanh));
  pai::Rng64 r(9);
  const auto p = pai::NetParams::sample(spec, r);
  const MatrixXd X = random_matrix(6, 4, 10);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 0, 5, 1, 4, 2;
  const MatrixXd K = pai::ntk_gram(spec, p, {}, X).K;
  const MatrixXd Kp = pai::ntk_gram(spec, p, {}, perm * X).K;
  EXPECT_LE(rel_diff(Kp, perm * K * perm.transpose()), 1e-13);
}

TEST(NtkGram, DeepNetworksAreRejected) {
  pai::NetSpec spec;
  spec.widths = {3, 4, 4, 4, 1};
  const auto p = pai::NetParams::zeros(spec);
  EXPECT_THROW(pai::ntk_gram(spec, p, {}, MatrixXd::Ones(2, 3)), pai::FeatureError);
}

TEST(Complexity, MatchesDirectInverse) {
  const MatrixXd A = random_matrix(7, 7, 11);
  pai::GramMatrix g;
  g.K = A * A.transpose() + 0.5 * MatrixXd::Identity(7, 7);
  g.min_eig_estimate = Eigen::SelfAdjointEigenSolver<MatrixXd>(g.K).eigenvalues()[0];
  const VectorXd y = random_matrix(7, 1, 12);
  const auto c = pai::complexity_term(g, y);
  EXPECT_EQ(c.jitter, 0.0);
  EXPECT_NEAR(c.value, y.dot(g.K.fullPivLu().inverse() * y), 1e-10 * c.value);
}

TEST(Complexity, SingularGramGetsJitter) {
  const auto spec = pai::NetSpec::one_hidden(3, 5, pai::Activation(pai::ActivationKind::Tanh));
  pai::Rng64 r(13);
  const auto p = pai::NetParams::sample(spec, r);
  MatrixXd X = random_matrix(4, 3, 14);
  X.row(3) = X.row(0);
  const auto g = pai::ntk_gram(spec, p, {}, X);
  VectorXd y(4);
  y << 1, -1, 1, -1;
  const auto c = pai::complexity_term(g, y);
  EXPECT_NEAR(c.jitter, 1e-6 * g.K.trace() / 4.0, 1e-18);
  EXPECT_TRUE(std::isfinite(c.value));
}

TEST(PathDensity, ConstantKernels) {
  const auto w = pai::GridKernel::constant(4, 0.2);
  const VectorXd p = pai::path_density(w, w, w);
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], 0.008, 1e-15);
}

TEST(PathDensity, HandComputed) {
  MatrixXd a(2, 2), b(2, 2), c(2, 2);
  a << 1, 0, 0.5, 1;
  b << 0, 1, 1, 1;
  c << 1, 1, 0, 0;
  const VectorXd p = pai::path_density(pai::GridKernel(a), pai::GridKernel(b), pai::GridKernel(c));
  // P[i0] = (1/8) sum_{i1,i2,i3} a(i1,i0) b(i2,i1) c(i3,i2)
  VectorXd expected = VectorXd::Zero(2);
  for (int i0 = 0; i0 < 2; ++i0)
    for (int i1 = 0; i1 < 2; ++i1)
      for (int i2 = 0; i2 < 2; ++i2)
        for (int i3 = 0; i3 < 2; ++i3) expected[i0] += a(i1, i0) * b(i2, i1) * c(i3, i2) / 8.0;
  EXPECT_LE((p - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(pai::path_density(pai::GridKernel(a), pai::GridKernel::constant(3, 1.0), pai::GridKernel(c)),
               pai::ArgumentError);
}

TEST(NoiseSweep, LayoutAndDeterminism) {
  pai::Rng64 dr(15);
  const auto data = pai::synth_gaussian(20, 8, 2.0, dr);
  pai::NoiseSweepConfig c;
  c.width = 32;
  c.seeds = 2;
  c.noise_grid = {0.0, 0.5};
  const auto rows = pai::noise_sweep(data, c, pai::Rng64(16));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].method, pai::PaiMethod::Snip);
  EXPECT_EQ(rows[1].method, pai::PaiMethod::Random);
  EXPECT_EQ(rows[2].noise, 0.5);
  for (const auto& r : rows) {
    ASSERT_EQ(r.values.size(), 2u);
    EXPECT_NEAR(r.mean, 0.5 * (r.values[0] + r.values[1]), 1e-12 * r.mean);
    EXPECT_NEAR(r.std, std::fabs(r.values[0] - r.values[1]) / std::sqrt(2.0), 1e-9 * r.mean);
  }
  const auto again = pai::noise_sweep(data, c, pai::Rng64(16));
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].values, again[i].values);
}

TEST(Synthetic, BalancedAndSeparated) {
  pai::Rng64 r(17);
  const auto d = pai::synth_gaussian(4000, 16, 3.0, r);
  EXPECT_EQ(d.size(), 4000u);
  EXPECT_EQ(d.y.sum(), 0.0);
  // projection on 1/sqrt(d) has mean +-separation per class
  const VectorXd proj = d.X.rowwise().sum() / 4.0;
  double pos = 0.0;
  for (Eigen::Index i = 0; i < 4000; ++i) pos += d.y[i] > 0 ? proj[i] : -proj[i];
  EXPECT_NEAR(pos / 4000.0, 3.0, 5.0 / std::sqrt(4000.0));
  EXPECT_THROW(pai::synth_gaussian(5, 3, 1.0, r), pai::ArgumentError);
}

TEST(Synthetic, FlipLabelsExactCount) {
  pai::Rng64 r(18);
  const auto d = pai::synth_gaussian(100, 4, 1.0, r);
  const auto f = pai::flip_labels(d, 0.3, r);
  EXPECT_EQ((f.y.array() != d.y.array()).count(), 30);
  EXPECT_EQ(f.noise_fraction, 0.3);
  EXPECT_THROW(pai::flip_labels(f, 0.1, r), pai::ContractError);
  EXPECT_THROW(pai::flip_labels(d, 1.5, r), pai::ArgumentError);
}

class CifarFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("pai_cifar_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  // Record with label `label` whose channel c pixel k is (k + 3c + label) mod 256.
  static std::string record(unsigned char label) {
    std::string r(pai::kCifarRecordBytes, '\0');
    r[0] = static_cast<char>(label);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < 1024; ++k) r[1 + c * 1024 + k] = static_cast<char>((k + 3 * c + label) % 256);
    return r;
  }

  std::filesystem::path write(const std::string& name, const std::string& bytes) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
  }

  std::filesystem::path dir_;
};

TEST_F(CifarFiles, KeepsRequestedClasses) {
  const auto f = write("a.bin", record(0) + record(2) + record(1) + record(0));
  const auto d = pai::load_cifar10_binary({f}, 0, 1, 10);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 3072u);
  EXPECT_EQ(d.y[0], -1.0);
  EXPECT_EQ(d.y[1], 1.0);
  EXPECT_DOUBLE_EQ(d.X(1, 1024 + 5), (5 + 3 + 1) / 255.0);
  EXPECT_EQ(d.source, pai::DataSource::Cifar10Binary);
  EXPECT_EQ(pai::load_cifar10_binary({f}, 0, 1, 2).size(), 2u);
}

TEST_F(CifarFiles, Grey16PoolsTheChannelMean) {
  const auto f = write("a.bin", record(1));
  const auto d = pai::load_cifar10_binary({f}, 0, 1, 1, {true, false});
  ASSERT_EQ(d.dim(), 256u);
  // channel mean at pixel k is k + 3 + 1; the 2x2 block at (0, 0) holds pixels 0, 1, 32, 33
  EXPECT_NEAR(d.X(0, 0), ((0 + 1 + 32 + 33) / 4.0 + 4.0) / 255.0, 1e-15);
}

TEST_F(CifarFiles, Errors) {
  const auto f = write("trunc.bin", record(0) + record(1).substr(0, 100));
  try {
    pai::load_cifar10_binary({f}, 0, 1, 10);
    FAIL() << "expected FormatError";
  } catch (const pai::FormatError& e) {
    EXPECT_EQ(e.offset(), pai::kCifarRecordBytes);
  }
  EXPECT_THROW(pai::load_cifar10_binary({dir_ / "missing.bin"}, 0, 1, 10), pai::IoError);
  const auto g = write("b.bin", record(5));
  EXPECT_THROW(pai::load_cifar10_binary({g}, 0, 1, 10), pai::ArgumentError);
  EXPECT_THROW(pai::load_cifar10_binary({g}, 3, 3, 10), pai::ArgumentError);
  EXPECT_THROW(pai::load_cifar10_binary({g}, 0, 1, 0), pai::ArgumentError);
}

}  // namespace
