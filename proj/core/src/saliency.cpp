#include "pai/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pai/errors.hpp"
#include "pai/special.hpp"

namespace pai {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void require_one_hidden(const NetSpec& spec, const char* who) {
  spec.validate();
  if (spec.depth() != 1)
    throw FeatureError(std::string(who) + ": only one-hidden-layer networks are supported");
}

std::vector<std::size_t> ascending_order(const VectorXd& keys) {
  std::vector<std::size_t> order(static_cast<std::size_t>(keys.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[idx(a)] < keys[idx(b)]; });
  return order;
}

std::vector<double> average_ranks(const MatrixXd& m) {
  const auto n = static_cast<std::size_t>(m.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double* data = m.data();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data[a] < data[b] || (data[a] == data[b] && a < b);
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && data[order[j]] == data[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j - 1)) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

// Layerwise SNIP: phi = |layer input|, psi = |df/dh| (rescaled so the last
// layer's psi is |a| |sigma'(h)|), xi = |theta|.
std::vector<SaliencyFactors> snip_layers(const NetSpec& spec, const NetParams& params,
                                         const VectorXd& x) {
  const Trace t = trace(spec, params, x);
  const double rescale = std::sqrt(static_cast<double>(spec.widths[spec.depth()]));
  std::vector<SaliencyFactors> out;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    SaliencyFactors f;
    f.phi = (l == 0 ? x : t.post[l - 1]).cwiseAbs();
    if (l + 1 == spec.depth()) {
      f.psi.resize(t.pre[l].size());
      for (Index j = 0; j < f.psi.size(); ++j)
        f.psi[j] = std::fabs(params.output[j]) * std::fabs(spec.activation.d1(t.pre[l][j]));
    } else {
      f.psi = rescale * t.beta[l].cwiseAbs();
    }
    f.xi_abs = params.weights[l].cwiseAbs();
    out.push_back(std::move(f));
  }
  return out;
}

// One-shot SynFlow for any depth: with R = 1^T |W_1| ... |W_L| |a|, the
// saliency of theta^(l)_ij is fwd_i |theta_ij| bwd_j.
std::vector<SaliencyFactors> synflow_layers(const NetSpec& spec, const NetParams& params) {
  const std::size_t depth = spec.depth();
  std::vector<VectorXd> fwd(depth), bwd(depth);
  fwd[0] = VectorXd::Ones(idx(spec.widths[0]));
  for (std::size_t l = 1; l < depth; ++l) fwd[l] = params.weights[l - 1].cwiseAbs().transpose() * fwd[l - 1];
  bwd[depth - 1] = params.output.cwiseAbs();
  for (std::size_t l = depth - 1; l > 0; --l) bwd[l - 1] = params.weights[l].cwiseAbs() * bwd[l];
  std::vector<SaliencyFactors> out;
  for (std::size_t l = 0; l < depth; ++l)
    out.push_back(SaliencyFactors{fwd[l], bwd[l], params.weights[l].cwiseAbs(), std::nullopt});
  return out;
}

}  // namespace

std::string_view method_name(PaiMethod m) noexcept {
  switch (m) {
    case PaiMethod::Snip:
      return "snip";
    case PaiMethod::GraspMagnitude:
      return "grasp-mag";
    case PaiMethod::GraspSigned:
      return "grasp-signed";
    case PaiMethod::Synflow:
      return "synflow";
    case PaiMethod::Magnitude:
      return "magnitude";
    case PaiMethod::Random:
      return "random";
  }
  return "?";
}

PaiMethod parse_method(std::string_view name) {
  for (auto m : {PaiMethod::Snip, PaiMethod::GraspMagnitude, PaiMethod::GraspSigned,
                 PaiMethod::Synflow, PaiMethod::Magnitude, PaiMethod::Random})
    if (method_name(m) == name) return m;
  throw ArgumentError("unknown pruning method '" + std::string(name) + "'");
}

MatrixXd SaliencyFactors::magnitude() const {
  return phi.asDiagonal() * xi_abs * psi.asDiagonal();
}

MatrixXd SaliencyFactors::ranking_score() const {
  return signed_score ? *signed_score : magnitude();
}

SaliencyFactors snip_scores(const NetSpec& spec, const NetParams& params, const VectorXd& x,
                            double y) {
  require_one_hidden(spec, "snip_scores");
  // |delta| / sqrt(nd) is a global factor and y only enters through it.
  SaliencyFactors f = std::move(snip_layers(spec, params, x).front());
  if (trace(spec, params, x).output == y) f.xi_abs.setZero();
  return f;
}

GraspDecomposition grasp_decomposition(const NetSpec& spec, const NetParams& params,
                                       const VectorXd& x, double y) {
  require_one_hidden(spec, "grasp_decomposition");
  const Trace t = trace(spec, params, x);
  const auto d = static_cast<double>(spec.widths[0]);
  const auto n = static_cast<double>(spec.widths[1]);
  const Activation act = spec.activation;
  const VectorXd& h = t.pre[0];
  const VectorXd& a = params.output;

  GraspDecomposition out;
  out.delta = t.output - y;
  const double x_sq = x.squaredNorm() / d;

  VectorXd s1(h.size()), s2(h.size());
  for (Index j = 0; j < h.size(); ++j) {
    s1[j] = act.d1(h[j]);
    s2[j] = act.d2(h[j]);
  }
  out.c_n = x_sq * (a.cwiseProduct(s1)).squaredNorm() / n;

  // g_ij = delta a_j sigma'(h_j) x_i / sqrt(nd)
  const VectorXd col_g = out.delta * a.cwiseProduct(s1) / std::sqrt(n);
  out.gradient = (x / std::sqrt(d)) * col_g.transpose();
  // R_ij = delta^2 (a_j^2/n) sigma''(h_j) sigma'(h_j) (|x|^2/d) x_i / sqrt(d)
  const VectorXd col_r =
      (out.delta * out.delta / n) * x_sq * a.cwiseProduct(a).cwiseProduct(s2).cwiseProduct(s1);
  out.remainder = (x / std::sqrt(d)) * col_r.transpose();
  out.hg = out.c_n * out.gradient + out.remainder;
  return out;
}

SaliencyFactors grasp_scores(const NetSpec& spec, const NetParams& params, const VectorXd& x,
                             double y, GraspVariant variant, HessianPath path) {
  require_one_hidden(spec, "grasp_scores");
  const Trace t = trace(spec, params, x);
  const auto d = static_cast<double>(spec.widths[0]);
  const auto n = static_cast<double>(spec.widths[1]);
  const Activation act = spec.activation;
  const VectorXd& h = t.pre[0];
  const VectorXd& a = params.output;
  const MatrixXd& theta = params.weights[0];
  const double delta = t.output - y;

  SaliencyFactors f;
  f.phi = x.cwiseAbs();
  f.psi.resize(h.size());
  for (Index j = 0; j < h.size(); ++j) f.psi[j] = std::fabs(a[j]) * std::fabs(act.d1(h[j]));

  MatrixXd hg;
  if (path == HessianPath::Analytic) {
    const GraspDecomposition dec = grasp_decomposition(spec, params, x, y);
    // Hg_ij = g_ij (c_n + r_j) with r_j = delta a_j sigma''(h_j) (|x|^2/d) / sqrt(n).
    const double x_sq = x.squaredNorm() / d;
    f.xi_abs = theta.cwiseAbs();
    if (dec.c_n > 0.0) {
      for (Index j = 0; j < h.size(); ++j) {
        const double r = delta * a[j] * act.d2(h[j]) * x_sq / std::sqrt(n);
        f.xi_abs.col(j) *= std::fabs(1.0 + r / dec.c_n);
      }
    }
    hg = dec.hg;
  } else {
    NetParams direction = NetParams::zeros(spec);
    direction.weights[0] = grad_params(spec, params, {}, x, y).weights[0];
    hg = hvp(spec, params, x, y, direction).weights[0];
    const double c_n = x.squaredNorm() / d * f.psi.squaredNorm() / n;
    const double global = std::fabs(delta) * c_n / std::sqrt(n * d);
    f.xi_abs = theta.cwiseAbs();
    for (Index j = 0; j < theta.cols(); ++j)
      for (Index i = 0; i < theta.rows(); ++i) {
        const double denom = global * f.phi[i] * f.psi[j];
        if (denom > 0.0) f.xi_abs(i, j) = std::fabs(theta(i, j) * hg(i, j)) / denom;
      }
  }
  if (delta == 0.0) f.xi_abs.setZero();
  if (variant == GraspVariant::Signed) f.signed_score = theta.cwiseProduct(hg);
  return f;
}

SaliencyFactors synflow_scores(const NetSpec& spec, const NetParams& params) {
  require_one_hidden(spec, "synflow_scores");
  return std::move(synflow_layers(spec, params).front());
}

SaliencyFactors magnitude_scores(const MatrixXd& theta) {
  return SaliencyFactors{VectorXd::Ones(theta.rows()), VectorXd::Ones(theta.cols()),
                         theta.cwiseAbs(), std::nullopt};
}

SaliencyFactors random_scores(std::size_t rows, std::size_t cols, Rng64& rng) {
  MatrixXd xi(idx(rows), idx(cols));
  for (Index k = 0; k < xi.size(); ++k) xi.data()[k] = rng.uniform();
  return SaliencyFactors{VectorXd::Ones(idx(rows)), VectorXd::Ones(idx(cols)), std::move(xi),
                         std::nullopt};
}

std::vector<SaliencyFactors> layer_scores(PaiMethod method, const NetSpec& spec,
                                          const NetParams& params, const VectorXd& x, double y,
                                          Rng64& rng) {
  spec.validate();
  if (spec.depth() > 2) throw FeatureError("layer_scores: depth must be 1 or 2");
  std::vector<SaliencyFactors> out;
  switch (method) {
    case PaiMethod::Snip:
      if (spec.depth() == 1) {
        out.push_back(snip_scores(spec, params, x, y));
        return out;
      }
      return snip_layers(spec, params, x);
    case PaiMethod::GraspMagnitude:
      out.push_back(grasp_scores(spec, params, x, y, GraspVariant::Magnitude));
      return out;
    case PaiMethod::GraspSigned:
      out.push_back(grasp_scores(spec, params, x, y, GraspVariant::Signed));
      return out;
    case PaiMethod::Synflow:
      return synflow_layers(spec, params);
    case PaiMethod::Magnitude:
      for (const auto& w : params.weights) out.push_back(magnitude_scores(w));
      return out;
    case PaiMethod::Random:
      for (std::size_t l = 0; l < spec.depth(); ++l)
        out.push_back(random_scores(spec.widths[l], spec.widths[l + 1], rng));
      return out;
  }
  return out;
}

Mask make_mask(const SaliencyFactors& factors, double rho, Rng64& rng) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ArgumentError("make_mask: rho must lie in (0, 1]");
  const MatrixXd score = factors.ranking_score();
  const auto total = static_cast<std::size_t>(score.size());
  const std::size_t k = top_count(rho, total);
  if (k == 0) throw ArgumentError("make_mask: rho * rows * cols rounds down to zero kept entries");

  std::vector<double> sorted(score.data(), score.data() + total);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                   std::greater<>());
  const double threshold = sorted[k - 1];

  Mask mask;
  mask.entries = Mask::Entries::Zero(score.rows(), score.cols());
  std::vector<std::size_t> ties;
  std::size_t kept = 0;
  for (std::size_t e = 0; e < total; ++e) {
    const double s = score.data()[e];
    if (s > threshold) {
      mask.entries.data()[e] = 1;
      ++kept;
    } else if (s == threshold) {
      ties.push_back(e);
    }
  }
  // Partial Fisher-Yates: the first `need` tied positions form a uniform subset.
  const std::size_t need = k - kept;
  for (std::size_t i = 0; i < need; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(ties.size() - i));
    std::swap(ties[i], ties[j]);
    mask.entries.data()[ties[i]] = 1;
  }
  mask.row_factors = factors.phi;
  mask.col_factors = factors.psi;
  mask.density = static_cast<double>(k) / static_cast<double>(total);
  return mask;
}

MatrixXd sorted_mask(const Mask& mask) {
  const auto rows = ascending_order(mask.row_factors);
  const auto cols = ascending_order(mask.col_factors);
  MatrixXd out(mask.entries.rows(), mask.entries.cols());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(idx(r), idx(c)) = mask.entries(idx(rows[r]), idx(cols[c]));
  return out;
}

PrunedNetwork sample_pruned_network(PaiMethod method, const NetSpec& spec, double rho, double label,
                                    const Rng64& rng) {
  spec.validate();
  PrunedNetwork net;
  net.spec = spec;
  Rng64 x_rng = rng.derive(0);
  net.x.resize(idx(spec.input_dim()));
  for (Index i = 0; i < net.x.size(); ++i) net.x[i] = x_rng.normal();
  Rng64 param_rng = rng.derive(1);
  net.params = NetParams::sample(spec, param_rng);
  Rng64 score_rng = rng.derive(2);
  Rng64 tie_rng = rng.derive(3);
  const auto factors = layer_scores(method, spec, net.params, net.x, label, score_rng);
  for (const auto& f : factors) net.masks.push_back(make_mask(f, rho, tie_rng));
  return net;
}

namespace {

std::vector<EmpiricalGraphon> seed_averaged(const GraphonExperiment& exp, const Rng64& master,
                                            std::size_t depth) {
  if (exp.seeds == 0) throw ArgumentError("empirical_graphon: need at least one seed");
  if (exp.width < exp.grid)
    throw ArgumentError("empirical_graphon: width " + std::to_string(exp.width) +
                        " is smaller than grid " + std::to_string(exp.grid));
  const NetSpec spec = depth == 1
                           ? NetSpec::one_hidden(exp.width, exp.width, exp.activation)
                           : NetSpec::two_hidden(exp.width, exp.width, exp.width, exp.activation);
  std::vector<MatrixXd> sums(depth, MatrixXd::Zero(idx(exp.width), idx(exp.width)));
  for (std::size_t s = 0; s < exp.seeds; ++s) {
    const PrunedNetwork net = sample_pruned_network(exp.method, spec, exp.rho, exp.label, master.derive(s));
    for (std::size_t l = 0; l < depth; ++l) sums[l] += sorted_mask(net.masks[l]);
  }
  std::vector<EmpiricalGraphon> out;
  for (std::size_t l = 0; l < depth; ++l) {
    sums[l] /= static_cast<double>(exp.seeds);
    out.push_back(EmpiricalGraphon{pool_to_grid(sums[l], exp.grid), exp.width, exp.seeds, exp.method,
                                   exp.activation, exp.rho});
  }
  return out;
}

}  // namespace

EmpiricalGraphon empirical_graphon(const GraphonExperiment& exp, const Rng64& master) {
  return std::move(seed_averaged(exp, master, 1).front());
}

std::pair<EmpiricalGraphon, EmpiricalGraphon> empirical_graphon_deep(const GraphonExperiment& exp,
                                                                     const Rng64& master) {
  if (exp.method == PaiMethod::GraspMagnitude || exp.method == PaiMethod::GraspSigned)
    throw FeatureError("empirical_graphon_deep: GraSP scoring is one-hidden-layer only");
  auto layers = seed_averaged(exp, master, 2);
  return {std::move(layers[0]), std::move(layers[1])};
}

double rank_correlation(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ArgumentError("rank_correlation: shape mismatch");
  if (a.size() < 2) throw ArgumentError("rank_correlation: need at least two entries");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const auto n = static_cast<double>(ra.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    const double da = ra[k] - mean;
    const double db = rb[k] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw ArgumentError("rank_correlation: undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace pai
