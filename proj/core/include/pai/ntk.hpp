#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pai/dataset.hpp"
#include "pai/grid.hpp"
#include "pai/net.hpp"
#include "pai/rng.hpp"
#include "pai/saliency.hpp"

namespace pai {

struct GramMatrix {
  Eigen::MatrixXd K;
  double jitter_used = 0.0;
  double min_eig_estimate = 0.0;
};

/// Empirical NTK Gram K = J J^T over every trainable parameter, masked
/// weights excluded. Rows of X are samples. Throws FeatureError for depth > 2.
GramMatrix ntk_gram(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks,
                    const Eigen::MatrixXd& X);

/// One hidden layer without bias:
///   K_pq = (1/n) sum_j s_j^p s_j^q + (1/n) sum_j a_j^2 s'_j^p s'_j^q (1/d) sum_i M_ij x_i^p x_i^q.
GramMatrix ntk_gram_one_hidden(const NetSpec& spec, const NetParams& params, const Mask* mask,
                               const Eigen::MatrixXd& X);

struct Complexity {
  double value = 0.0;   ///< y^T K^-1 y
  double jitter = 0.0;  ///< diagonal shift applied, 0 if none
};

/// Solves K z = y by Cholesky. When the smallest eigenvalue is below
/// 1e-10 tr(K)/m the diagonal is shifted by 1e-6 tr(K)/m first.
/// Throws NumericError when the factorisation still fails.
Complexity complexity_term(const GramMatrix& gram, const Eigen::VectorXd& y);

struct NoiseSweepConfig {
  std::vector<PaiMethod> methods{PaiMethod::Snip, PaiMethod::Random};
  double rho = 0.2;
  std::size_t width = 1024;
  std::size_t depth = 2;
  std::vector<double> noise_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t seeds = 5;
  Activation activation{};
};

struct NoiseSweepRow {
  double noise = 0.0;
  PaiMethod method = PaiMethod::Snip;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation over seeds (0 for one seed)
  std::size_t seeds = 0;
  double max_jitter = 0.0;
  std::vector<double> values;  ///< per seed
};

/// For every seed s the network is drawn from master.derive(s), scored on the
/// first sample with its clean label and pruned to rho in every hidden layer;
/// labels at noise level k are flipped with master.derive(s).derive(1 + k),
/// shared across methods. Rows are noise-major, then method.
std::vector<NoiseSweepRow> noise_sweep(const Dataset& data, const NoiseSweepConfig& config,
                                       const Rng64& master);

/// P[i0] = (1/G^3) sum W1[i1, i0] W2[i2, i1] W3[i3, i2], kernels indexed
/// [next layer][previous layer]. Throws ArgumentError for mismatched grids.
Eigen::VectorXd path_density(const GridKernel& w1, const GridKernel& w2, const GridKernel& w3);

}  // namespace pai
