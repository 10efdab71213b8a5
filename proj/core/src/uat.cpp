#include "pai/uat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>

#include "pai/errors.hpp"

namespace pai {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

MatrixXd features(const MatrixXd& points, const MatrixXd& theta, const VectorXd& bias) {
  MatrixXd z = points * theta.transpose();
  z.rowwise() += bias.transpose();
  return z.array().tanh().matrix();
}

VectorXd evaluate_target(const Target& f, const MatrixXd& points) {
  VectorXd out(points.rows());
  std::vector<double> u(static_cast<std::size_t>(points.cols()));
  for (Index p = 0; p < points.rows(); ++p) {
    for (Index c = 0; c < points.cols(); ++c) u[static_cast<std::size_t>(c)] = points(p, c);
    out[p] = f(u);
  }
  return out;
}

}  // namespace

std::optional<ActiveRectangle> find_active_rectangle(const GridKernel& w, double p_floor) {
  if (!(p_floor > 0.0 && p_floor < 1.0)) throw ArgumentError("find_active_rectangle: p_floor must lie in (0, 1)");
  const std::size_t g = w.size();
  // suffix[iu][iv] = min over [iu, G) x [iv, G).
  MatrixXd suffix(idx(g) + 1, idx(g) + 1);
  suffix.setConstant(std::numeric_limits<double>::infinity());
  for (std::size_t iu = g; iu-- > 0;)
    for (std::size_t iv = g; iv-- > 0;)
      suffix(idx(iu), idx(iv)) = std::min({w(iu, iv), suffix(idx(iu) + 1, idx(iv)), suffix(idx(iu), idx(iv) + 1)});

  std::optional<ActiveRectangle> best;
  std::size_t best_area = 0;
  for (std::size_t iu = 0; iu < g; ++iu)
    for (std::size_t iv = 0; iv < g; ++iv) {
      if (suffix(idx(iu), idx(iv)) < p_floor) continue;
      const std::size_t area = (g - iu) * (g - iv);
      if (area > best_area) {
        best_area = area;
        const double gd = static_cast<double>(g);
        best = ActiveRectangle{iu, iv, g, (gd - static_cast<double>(iu)) / gd,
                               (gd - static_cast<double>(iv)) / gd, suffix(idx(iu), idx(iv))};
      }
      break;  // larger iv only shrinks the rectangle for this iu
    }
  return best;
}

std::vector<std::size_t> top_k_rows(const VectorXd& factors, std::size_t k) {
  if (k > static_cast<std::size_t>(factors.size())) throw ArgumentError("top_k_rows: k exceeds the number of rows");
  std::vector<std::size_t> order(static_cast<std::size_t>(factors.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return factors[idx(a)] > factors[idx(b)]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::size_t count_good_columns(const Mask& mask, const std::vector<std::size_t>& rows) {
  for (auto i : rows)
    if (i >= mask.rows()) throw ArgumentError("count_dense_core: row " + std::to_string(i) + " out of range");
  std::size_t good = 0;
  for (std::size_t j = 0; j < mask.cols(); ++j) {
    bool all = true;
    for (auto i : rows)
      if (!mask(i, j)) {
        all = false;
        break;
      }
    good += all;
  }
  return good;
}

DenseCore count_dense_core(const Mask& mask, const std::vector<std::size_t>& rows, std::size_t ntilde) {
  if (ntilde == 0) throw ArgumentError("count_dense_core: ntilde must be positive");
  DenseCore core;
  core.rows = rows;
  core.n_good = count_good_columns(mask, rows);
  if (core.n_good < ntilde) throw InsufficientCoreError(core.n_good, ntilde);
  for (std::size_t j = 0; j < mask.cols() && core.cols.size() < ntilde; ++j) {
    bool all = true;
    for (auto i : rows) all = all && mask(i, j);
    if (all) core.cols.push_back(j);
  }
  return core;
}

ChernoffPrediction chernoff_predictor(double n, double alpha, double p_star, std::size_t k) {
  if (!(n > 0.0 && alpha > 0.0 && p_star > 0.0 && p_star <= 1.0 && k > 0))
    throw ArgumentError("chernoff_predictor: arguments must be positive with p_star <= 1");
  ChernoffPrediction p;
  p.mu_lower = 0.5 * alpha * n * std::pow(0.5 * p_star, static_cast<double>(k));
  p.fail_prob_upper = std::exp(-p.mu_lower / 8.0);
  return p;
}

double FeatureApproximator::operator()(std::span<const double> u) const {
  if (u.size() != dim()) throw ArgumentError("FeatureApproximator: input dimension mismatch");
  double out = 0.0;
  for (Index r = 0; r < a.size(); ++r) {
    double z = bias[r];
    for (Index c = 0; c < theta.cols(); ++c) z += theta(r, c) * u[static_cast<std::size_t>(c)];
    out += a[r] * std::tanh(z);
  }
  return out;
}

MatrixXd lattice(std::size_t k, std::size_t g) {
  if (k == 0 || g < 2) throw ArgumentError("lattice: need k >= 1 and at least 2 points per axis");
  std::size_t total = 1;
  for (std::size_t c = 0; c < k; ++c) total *= g;
  MatrixXd pts(idx(total), idx(k));
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    for (std::size_t c = k; c-- > 0;) {
      pts(idx(p), idx(c)) = -1.0 + 2.0 * static_cast<double>(rem % g) / static_cast<double>(g - 1);
      rem /= g;
    }
  }
  return pts;
}

FeatureApproximator fit_with_features(const Target& f, MatrixXd theta, VectorXd bias, std::size_t train_grid,
                                      const FitOptions& options) {
  if (theta.rows() == 0 || theta.cols() == 0) throw ArgumentError("fit: need at least one feature and one coordinate");
  if (bias.size() != theta.rows()) throw ArgumentError("fit: bias length mismatch");
  if (train_grid < 2) throw ArgumentError("fit: train_grid must be at least 2");
  const auto k = static_cast<std::size_t>(theta.cols());
  const Index nt = theta.rows();

  const MatrixXd train = lattice(k, train_grid);
  const Index np = train.rows();
  MatrixXd aug = MatrixXd::Zero(np + nt, nt);
  aug.topRows(np) = features(train, theta, bias);
  aug.bottomRows(nt).diagonal().setConstant(std::sqrt(options.ridge));
  VectorXd rhs = VectorXd::Zero(np + nt);
  rhs.head(np) = evaluate_target(f, train);

  FeatureApproximator fa;
  fa.a = aug.householderQr().solve(rhs);
  if (!fa.a.allFinite()) throw NumericError("fit: least-squares solution is not finite");
  fa.theta = std::move(theta);
  fa.bias = std::move(bias);

  const std::size_t tg = options.test_grid ? options.test_grid : 2 * train_grid + 1;
  const MatrixXd test = lattice(k, tg);
  const VectorXd pred = features(test, fa.theta, fa.bias) * fa.a;
  fa.sup_error = (pred - evaluate_target(f, test)).cwiseAbs().maxCoeff();
  return fa;
}

FeatureApproximator fit_k_feature_approximator(const Target& f, std::size_t k, std::size_t ntilde,
                                               std::size_t train_grid, Rng64& rng, const FitOptions& options) {
  if (k == 0 || ntilde == 0) throw ArgumentError("fit_k_feature_approximator: k and ntilde must be positive");
  MatrixXd theta(idx(ntilde), idx(k));
  VectorXd bias(idx(ntilde));
  for (Index r = 0; r < theta.rows(); ++r) {
    for (Index c = 0; c < theta.cols(); ++c) theta(r, c) = options.theta_scale * rng.normal();
    bias[r] = rng.uniform(-2.0, 2.0);
  }
  return fit_with_features(f, std::move(theta), std::move(bias), train_grid, options);
}

NetParams embed_into_mask(const NetSpec& spec, const Mask& mask, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols, const FeatureApproximator& approx) {
  spec.validate();
  if (spec.depth() != 1 || !spec.use_bias || spec.activation.kind() != ActivationKind::Tanh)
    throw ArgumentError("embed_into_mask: needs a one-hidden-layer tanh network with biases");
  const std::size_t d = spec.input_dim();
  const std::size_t n = spec.width(1);
  if (mask.rows() != d || mask.cols() != n) throw ArgumentError("embed_into_mask: mask shape mismatch");
  if (rows.size() != approx.dim() || cols.size() != approx.features())
    throw ArgumentError("embed_into_mask: core size does not match the approximator");
  for (auto i : rows)
    if (i >= d) throw ArgumentError("embed_into_mask: row index out of range");
  for (auto j : cols)
    if (j >= n) throw ArgumentError("embed_into_mask: column index out of range");
  for (auto i : rows)
    for (auto j : cols)
      if (!mask(i, j))
        throw ContractError("embed_into_mask: mask entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is pruned");

  NetParams p = NetParams::zeros(spec);
  const double sd = std::sqrt(static_cast<double>(d));
  const double sn = std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < cols.size(); ++r) {
    const Index j = idx(cols[r]);
    for (std::size_t c = 0; c < rows.size(); ++c) p.weights[0](idx(rows[c]), j) = sd * approx.theta(idx(r), idx(c));
    p.biases[0][j] = approx.bias[idx(r)];
    p.output[j] = sn * approx.a[idx(r)];
  }
  return p;
}

}  // namespace pai
