#include "pai/net.hpp"

#include <cmath>
#include <string>

#include "pai/errors.hpp"

namespace pai {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void check_shapes(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks) {
  spec.validate();
  const std::size_t depth = spec.depth();
  if (params.weights.size() != depth) throw ArgumentError("NetParams: layer count mismatch");
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& w = params.weights[l];
    if (w.rows() != idx(spec.widths[l]) || w.cols() != idx(spec.widths[l + 1]))
      throw ArgumentError("NetParams: weight matrix " + std::to_string(l + 1) + " has wrong shape");
  }
  if (params.output.size() != idx(spec.widths[depth]))
    throw ArgumentError("NetParams: output weight length mismatch");
  if (spec.use_bias) {
    if (params.biases.size() != depth) throw ArgumentError("NetParams: bias count mismatch");
    for (std::size_t l = 0; l < depth; ++l)
      if (params.biases[l].size() != idx(spec.widths[l + 1]))
        throw ArgumentError("NetParams: bias length mismatch");
  }
  if (!masks.empty()) {
    if (masks.size() != depth) throw ArgumentError("masks: need one mask per hidden layer");
    for (std::size_t l = 0; l < depth; ++l)
      if (masks[l].rows() != spec.widths[l] || masks[l].cols() != spec.widths[l + 1])
        throw ArgumentError("masks: mask " + std::to_string(l + 1) + " has wrong shape");
  }
}

VectorXd map_act(const Activation& act, const VectorXd& h, int order) {
  VectorXd out(h.size());
  for (Index k = 0; k < h.size(); ++k) {
    const double v = h[k];
    out[k] = order == 0 ? act.value(v) : order == 1 ? act.d1(v) : act.d2(v);
  }
  return out;
}

}  // namespace

NetSpec NetSpec::one_hidden(std::size_t d, std::size_t n, Activation act, bool bias) {
  return NetSpec{{d, n, 1}, act, bias};
}

NetSpec NetSpec::two_hidden(std::size_t d, std::size_t n1, std::size_t n2, Activation act,
                            bool bias) {
  return NetSpec{{d, n1, n2, 1}, act, bias};
}

void NetSpec::validate() const {
  if (widths.size() < 3) throw ArgumentError("NetSpec: need at least one hidden layer");
  for (auto w : widths)
    if (w == 0) throw ArgumentError("NetSpec: widths must be positive");
  if (widths.back() != 1) throw ArgumentError("NetSpec: output width must be 1");
}

NetParams NetParams::sample(const NetSpec& spec, Rng64& rng) {
  spec.validate();
  NetParams p = zeros(spec);
  for (auto& w : p.weights)
    for (Index c = 0; c < w.cols(); ++c)
      for (Index r = 0; r < w.rows(); ++r) w(r, c) = rng.normal();
  for (Index j = 0; j < p.output.size(); ++j) p.output[j] = rng.normal();
  return p;
}

NetParams NetParams::zeros(const NetSpec& spec) {
  spec.validate();
  NetParams p;
  const std::size_t depth = spec.depth();
  for (std::size_t l = 0; l < depth; ++l)
    p.weights.push_back(MatrixXd::Zero(idx(spec.widths[l]), idx(spec.widths[l + 1])));
  p.output = VectorXd::Zero(idx(spec.widths[depth]));
  if (spec.use_bias)
    for (std::size_t l = 0; l < depth; ++l) p.biases.push_back(VectorXd::Zero(idx(spec.widths[l + 1])));
  return p;
}

NetParams& NetParams::axpy(double alpha, const NetParams& x) {
  for (std::size_t l = 0; l < weights.size(); ++l) weights[l] += alpha * x.weights[l];
  output += alpha * x.output;
  for (std::size_t l = 0; l < biases.size() && l < x.biases.size(); ++l) biases[l] += alpha * x.biases[l];
  return *this;
}

NetParams NetParams::scaled(double alpha) const {
  NetParams out = *this;
  for (auto& w : out.weights) w *= alpha;
  out.output *= alpha;
  for (auto& b : out.biases) b *= alpha;
  return out;
}

double NetParams::dot(const NetParams& other) const {
  double s = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) s += weights[l].cwiseProduct(other.weights[l]).sum();
  s += output.dot(other.output);
  for (std::size_t l = 0; l < biases.size() && l < other.biases.size(); ++l) s += biases[l].dot(other.biases[l]);
  return s;
}

double NetParams::max_abs() const {
  double m = output.size() ? output.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& w : weights)
    if (w.size()) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases)
    if (b.size()) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

std::size_t NetParams::size() const {
  std::size_t s = static_cast<std::size_t>(output.size());
  for (const auto& w : weights) s += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) s += static_cast<std::size_t>(b.size());
  return s;
}

VectorXd NetParams::flatten() const {
  VectorXd out(idx(size()));
  Index pos = 0;
  for (const auto& w : weights) {
    out.segment(pos, w.size()) = Eigen::Map<const VectorXd>(w.data(), w.size());
    pos += w.size();
  }
  out.segment(pos, output.size()) = output;
  pos += output.size();
  for (const auto& b : biases) {
    out.segment(pos, b.size()) = b;
    pos += b.size();
  }
  return out;
}

Mask Mask::ones(std::size_t rows, std::size_t cols) {
  Mask m;
  m.entries = Entries::Ones(idx(rows), idx(cols));
  m.row_factors = VectorXd::Ones(idx(rows));
  m.col_factors = VectorXd::Ones(idx(cols));
  m.density = 1.0;
  return m;
}

std::size_t Mask::popcount() const {
  std::size_t c = 0;
  for (Index k = 0; k < entries.size(); ++k) c += entries.data()[k] != 0;
  return c;
}

MatrixXd Mask::apply(const MatrixXd& theta) const {
  if (theta.rows() != entries.rows() || theta.cols() != entries.cols())
    throw ArgumentError("Mask::apply: shape mismatch");
  MatrixXd out(theta.rows(), theta.cols());
  for (Index k = 0; k < theta.size(); ++k) out.data()[k] = entries.data()[k] ? theta.data()[k] : 0.0;
  return out;
}

NetParams apply_masks(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks) {
  check_shapes(spec, params, masks);
  NetParams out = params;
  for (std::size_t l = 0; l < masks.size(); ++l) out.weights[l] = masks[l].apply(params.weights[l]);
  return out;
}

Trace trace(const NetSpec& spec, const NetParams& effective, const VectorXd& x) {
  check_shapes(spec, effective, {});
  if (x.size() != idx(spec.input_dim())) throw ArgumentError("forward: input dimension mismatch");
  const std::size_t depth = spec.depth();
  const Activation act = spec.activation;

  Trace t;
  VectorXd prev = x;
  for (std::size_t l = 0; l < depth; ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
    VectorXd h = scale * (effective.weights[l].transpose() * prev);
    if (spec.use_bias) h += effective.biases[l];
    VectorXd a = map_act(act, h, 0);
    t.pre.push_back(h);
    t.post.push_back(a);
    prev = std::move(a);
  }
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(spec.widths[depth]));
  t.output = out_scale * effective.output.dot(prev);

  t.beta.resize(depth);
  t.beta[depth - 1] = out_scale * effective.output.cwiseProduct(map_act(act, t.pre[depth - 1], 1));
  for (std::size_t l = depth - 1; l > 0; --l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
    VectorXd back = scale * (effective.weights[l] * t.beta[l]);
    t.beta[l - 1] = back.cwiseProduct(map_act(act, t.pre[l - 1], 1));
  }
  return t;
}

ForwardResult forward(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks,
                      const VectorXd& x) {
  Trace t = trace(spec, apply_masks(spec, params, masks), x);
  return ForwardResult{t.output, std::move(t.pre), std::move(t.post)};
}

NetParams output_gradient(const NetSpec& spec, const NetParams& effective,
                          std::span<const Mask> masks, const VectorXd& x) {
  const Trace t = trace(spec, effective, x);
  const std::size_t depth = spec.depth();
  NetParams g = NetParams::zeros(spec);
  for (std::size_t l = 0; l < depth; ++l) {
    const VectorXd& input = l == 0 ? x : t.post[l - 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
    g.weights[l] = scale * input * t.beta[l].transpose();
    if (!masks.empty()) g.weights[l] = masks[l].apply(g.weights[l]);
    if (spec.use_bias) g.biases[l] = t.beta[l];
  }
  g.output = t.post[depth - 1] / std::sqrt(static_cast<double>(spec.widths[depth]));
  return g;
}

NetParams grad_params(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks,
                      const VectorXd& x, double y) {
  const NetParams effective = apply_masks(spec, params, masks);
  NetParams g = output_gradient(spec, effective, masks, x);
  const double delta = trace(spec, effective, x).output - y;
  return g.scaled(delta);
}

NetParams hvp(const NetSpec& spec, const NetParams& params, const VectorXd& x, double y,
              const NetParams& direction) {
  spec.validate();
  if (spec.depth() != 1) throw FeatureError("hvp: only one-hidden-layer networks are supported");
  const double h = 1e-4 * (1.0 + direction.max_abs());
  NetParams plus = params;
  plus.axpy(h, direction);
  NetParams minus = params;
  minus.axpy(-h, direction);
  NetParams out = grad_params(spec, plus, {}, x, y);
  out.axpy(-1.0, grad_params(spec, minus, {}, x, y));
  return out.scaled(1.0 / (2.0 * h));
}

}  // namespace pai
