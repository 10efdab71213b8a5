#include "pai/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pai/errors.hpp"

namespace pai {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

constexpr Index kChunkColumns = 4096;

// Adds the weight-layer block sum_j sum_{i in S_j} (in_i beta_j)(in_i beta_j)^T / fan_in.
// `input` is m x fan_in, `beta` is m x fan_out.
void add_weight_block(MatrixXd& k, const MatrixXd& input, const MatrixXd& beta, const Mask* mask) {
  const Index m = input.rows();
  const Index fan_in = input.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  MatrixXd chunk(m, std::min<Index>(kChunkColumns, std::max<Index>(fan_in, 1)));
  Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    k.selfadjointView<Eigen::Lower>().rankUpdate(chunk.leftCols(filled));
    filled = 0;
  };
  for (Index j = 0; j < beta.cols(); ++j) {
    const VectorXd b = scale * beta.col(j);
    for (Index i = 0; i < fan_in; ++i) {
      if (mask && !(*mask)(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
      if (filled == chunk.cols()) flush();
      chunk.col(filled++) = input.col(i).cwiseProduct(b);
    }
  }
  flush();
}

double smallest_eigenvalue(const MatrixXd& k) {
  if (k.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(k, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue estimate of the Gram matrix failed");
  return es.eigenvalues().minCoeff();
}

GramMatrix finalize(MatrixXd lower) {
  GramMatrix g;
  g.K = lower.selfadjointView<Eigen::Lower>();
  g.min_eig_estimate = smallest_eigenvalue(g.K);
  return g;
}

}  // namespace

GramMatrix ntk_gram(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks,
                    const MatrixXd& X) {
  spec.validate();
  const std::size_t depth = spec.depth();
  if (depth > 2) throw FeatureError("ntk_gram: depth " + std::to_string(depth) + " is not supported");
  if (!masks.empty() && masks.size() != depth)
    throw ArgumentError("ntk_gram: need one mask per hidden layer");
  if (X.cols() != idx(spec.input_dim())) throw ArgumentError("ntk_gram: input dimension mismatch");
  const Index m = X.rows();
  const NetParams effective = apply_masks(spec, params, masks);

  // Per-layer sample matrices: post[l] and beta[l] are m x n_{l+1}.
  std::vector<MatrixXd> post(depth), beta(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    post[l].resize(m, idx(spec.widths[l + 1]));
    beta[l].resize(m, idx(spec.widths[l + 1]));
  }
  for (Index p = 0; p < m; ++p) {
    const Trace t = trace(spec, effective, X.row(p).transpose());
    for (std::size_t l = 0; l < depth; ++l) {
      post[l].row(p) = t.post[l].transpose();
      beta[l].row(p) = t.beta[l].transpose();
    }
  }

  MatrixXd k = MatrixXd::Zero(m, m);
  for (std::size_t l = 0; l < depth; ++l) {
    const MatrixXd& input = l == 0 ? X : post[l - 1];
    add_weight_block(k, input, beta[l], masks.empty() ? nullptr : &masks[l]);
    if (spec.use_bias) k.selfadjointView<Eigen::Lower>().rankUpdate(beta[l]);
  }
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(spec.widths[depth]));
  k.selfadjointView<Eigen::Lower>().rankUpdate(post[depth - 1], out_scale * out_scale);
  return finalize(std::move(k));
}

GramMatrix ntk_gram_one_hidden(const NetSpec& spec, const NetParams& params, const Mask* mask,
                               const MatrixXd& X) {
  spec.validate();
  if (spec.depth() != 1 || spec.use_bias)
    throw FeatureError("ntk_gram_one_hidden: one hidden layer without bias only");
  const Index d = idx(spec.input_dim());
  const Index n = idx(spec.width(1));
  if (X.cols() != d) throw ArgumentError("ntk_gram_one_hidden: input dimension mismatch");
  const Activation act = spec.activation;
  const MatrixXd theta = mask ? mask->apply(params.weights[0]) : params.weights[0];
  const MatrixXd h = (X * theta) / std::sqrt(static_cast<double>(d));
  const MatrixXd s = h.unaryExpr([act](double v) { return act.value(v); });
  const MatrixXd s1 = h.unaryExpr([act](double v) { return act.d1(v); });
  const MatrixXd m_real = mask ? mask->as_real() : MatrixXd::Ones(d, n);
  const VectorXd a2 = params.output.cwiseAbs2();

  const Index m = X.rows();
  MatrixXd k(m, m);
  for (Index p = 0; p < m; ++p)
    for (Index q = 0; q <= p; ++q) {
      double out = 0.0, hidden = 0.0;
      for (Index j = 0; j < n; ++j) {
        out += s(p, j) * s(q, j);
        double inner = 0.0;
        for (Index i = 0; i < d; ++i) inner += m_real(i, j) * X(p, i) * X(q, i);
        hidden += a2[j] * s1(p, j) * s1(q, j) * inner / static_cast<double>(d);
      }
      k(p, q) = k(q, p) = (out + hidden) / static_cast<double>(n);
    }
  GramMatrix g;
  g.K = std::move(k);
  g.min_eig_estimate = smallest_eigenvalue(g.K);
  return g;
}

Complexity complexity_term(const GramMatrix& gram, const VectorXd& y) {
  const Index m = gram.K.rows();
  if (m == 0) throw ArgumentError("complexity_term: empty Gram matrix");
  if (gram.K.cols() != m || y.size() != m) throw ArgumentError("complexity_term: shape mismatch");
  const double mean_diag = gram.K.trace() / static_cast<double>(m);
  const double min_eig = std::isfinite(gram.min_eig_estimate) ? gram.min_eig_estimate
                                                               : smallest_eigenvalue(gram.K);
  Complexity c;
  MatrixXd k = gram.K;
  if (min_eig < 1e-10 * mean_diag) {
    c.jitter = 1e-6 * mean_diag;
    k.diagonal().array() += c.jitter;
  }
  Eigen::LLT<MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw NumericError("complexity_term: Cholesky factorisation failed");
  c.value = y.dot(llt.solve(y));
  return c;
}

std::vector<NoiseSweepRow> noise_sweep(const Dataset& data, const NoiseSweepConfig& config,
                                       const Rng64& master) {
  if (data.size() == 0) throw ArgumentError("noise_sweep: empty dataset");
  if (config.seeds == 0) throw ArgumentError("noise_sweep: need at least one seed");
  if (config.methods.empty()) throw ArgumentError("noise_sweep: no methods given");
  for (double v : config.noise_grid)
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("noise_sweep: noise levels must lie in [0, 1]");
  if (config.depth != 1 && config.depth != 2)
    throw FeatureError("noise_sweep: depth must be 1 or 2");

  const std::size_t d = data.dim();
  const NetSpec spec = config.depth == 1
                           ? NetSpec::one_hidden(d, config.width, config.activation)
                           : NetSpec::two_hidden(d, config.width, config.width, config.activation);
  const VectorXd x0 = data.X.row(0).transpose();
  const double y0 = data.y[0];

  const std::size_t nm = config.methods.size();
  const std::size_t nk = config.noise_grid.size();
  // values[k][method][seed]
  std::vector<std::vector<std::vector<double>>> values(
      nk, std::vector<std::vector<double>>(nm, std::vector<double>(config.seeds)));
  std::vector<std::vector<double>> jitter(nk, std::vector<double>(nm, 0.0));

  for (std::size_t s = 0; s < config.seeds; ++s) {
    const Rng64 seed_rng = master.derive(s);
    Rng64 param_rng = seed_rng.derive(0);
    const NetParams params = NetParams::sample(spec, param_rng);
    std::vector<Dataset> noisy;
    for (std::size_t k = 0; k < nk; ++k) {
      Rng64 flip_rng = seed_rng.derive(1 + k);
      noisy.push_back(flip_labels(data, config.noise_grid[k], flip_rng));
    }
    for (std::size_t mi = 0; mi < nm; ++mi) {
      Rng64 score_rng = seed_rng.derive(1000 + 2 * mi);
      Rng64 tie_rng = seed_rng.derive(1001 + 2 * mi);
      const auto factors = layer_scores(config.methods[mi], spec, params, x0, y0, score_rng);
      std::vector<Mask> masks;
      for (const auto& f : factors) masks.push_back(make_mask(f, config.rho, tie_rng));
      // The mask does not depend on the noisy labels, so one Gram serves every level.
      const GramMatrix gram = ntk_gram(spec, params, masks, data.X);
      for (std::size_t k = 0; k < nk; ++k) {
        const Complexity c = complexity_term(gram, noisy[k].y);
        values[k][mi][s] = c.value;
        jitter[k][mi] = std::max(jitter[k][mi], c.jitter);
      }
    }
  }

  std::vector<NoiseSweepRow> rows;
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t mi = 0; mi < nm; ++mi) {
      const auto& v = values[k][mi];
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      rows.push_back(NoiseSweepRow{config.noise_grid[k], config.methods[mi], mean, sd, v.size(), jitter[k][mi], v});
    }
  return rows;
}

Eigen::VectorXd path_density(const GridKernel& w1, const GridKernel& w2, const GridKernel& w3) {
  const std::size_t g = w1.size();
  if (w2.size() != g || w3.size() != g)
    throw ArgumentError("path_density: grids of sizes " + std::to_string(w1.size()) + ", " +
                        std::to_string(w2.size()) + ", " + std::to_string(w3.size()) + " differ");
  const double inv = 1.0 / static_cast<double>(g);
  const VectorXd t2 = w3.cells().transpose() * VectorXd::Constant(idx(g), inv);
  const VectorXd t1 = w2.cells().transpose() * t2 * inv;
  return w1.cells().transpose() * t1 * inv;
}

}  // namespace pai
