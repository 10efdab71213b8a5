#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pai/activation.hpp"
#include "pai/rng.hpp"

namespace pai {

/// Architecture of a fully connected network d -> n_1 -> ... -> n_L -> 1.
///
/// Every layer divides its pre-activation by sqrt(fan-in):
///   h^(l)_j = (1/sqrt(n_{l-1})) sum_i theta^(l)_ij a^(l-1)_i + b^(l)_j
///   f(x)    = (1/sqrt(n_L)) sum_j a_j sigma(h^(L)_j)
struct NetSpec {
  std::vector<std::size_t> widths;  ///< [d, n_1, ..., n_L, 1]
  Activation activation{};
  bool use_bias = false;

  static NetSpec one_hidden(std::size_t d, std::size_t n, Activation act, bool bias = false);
  static NetSpec two_hidden(std::size_t d, std::size_t n1, std::size_t n2, Activation act,
                            bool bias = false);

  /// Number of hidden layers L.
  std::size_t depth() const noexcept { return widths.size() - 2; }
  std::size_t input_dim() const noexcept { return widths.front(); }
  /// Width of hidden layer `layer` in 1..L.
  std::size_t width(std::size_t layer) const noexcept { return widths[layer]; }

  /// Throws ArgumentError unless L >= 1, all widths >= 1 and the last width is 1.
  void validate() const;
};

/// Network parameters. Also used as the type of parameter-shaped vectors
/// (gradients, Hessian-vector products).
struct NetParams {
  std::vector<Eigen::MatrixXd> weights;  ///< weights[l] is n_l x n_{l+1} (0-based layer l)
  Eigen::VectorXd output;                ///< a, length n_L
  std::vector<Eigen::VectorXd> biases;   ///< one per hidden layer when the spec has biases

  /// i.i.d. N(0,1) weights (column-major draw order, layer by layer, then
  /// the output vector); biases zero.
  static NetParams sample(const NetSpec& spec, Rng64& rng);
  static NetParams zeros(const NetSpec& spec);

  NetParams& axpy(double alpha, const NetParams& x);
  NetParams scaled(double alpha) const;
  double dot(const NetParams& other) const;
  double max_abs() const;
  std::size_t size() const;
  Eigen::VectorXd flatten() const;
};

/// Binary pruning mask of one layer with its latent row and column factors.
struct Mask {
  using Entries = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  Entries entries;
  Eigen::VectorXd row_factors;
  Eigen::VectorXd col_factors;
  double density = 1.0;

  static Mask ones(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries.cols()); }
  std::size_t popcount() const;
  bool operator()(std::size_t i, std::size_t j) const {
    return entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0;
  }
  /// theta (elementwise) M.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& theta) const;
  Eigen::MatrixXd as_real() const { return entries.cast<double>(); }
};

/// Intermediate quantities of one forward/backward pass.
struct ForwardResult {
  double output = 0.0;
  std::vector<Eigen::VectorXd> pre;   ///< h^(l), l = 1..L
  std::vector<Eigen::VectorXd> post;  ///< sigma(h^(l)), l = 1..L
};

/// Forward pass plus the backpropagated sensitivities beta^(l) = df/dh^(l).
struct Trace : ForwardResult {
  std::vector<Eigen::VectorXd> beta;
};

/// Weights with masks applied. `masks` is empty (dense) or holds one mask per
/// hidden layer; the n_L -> 1 output layer is never masked.
NetParams apply_masks(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks);

ForwardResult forward(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks,
                      const Eigen::VectorXd& x);

/// Forward and backward pass on already-masked parameters.
Trace trace(const NetSpec& spec, const NetParams& effective, const Eigen::VectorXd& x);

/// df/dparams on already-masked parameters, masks applied to the weight
/// gradients (d/dtheta of f(theta (elementwise) M)).
NetParams output_gradient(const NetSpec& spec, const NetParams& effective,
                          std::span<const Mask> masks, const Eigen::VectorXd& x);

/// Gradient of L = (f(x) - y)^2 / 2 with respect to every parameter.
NetParams grad_params(const NetSpec& spec, const NetParams& params, std::span<const Mask> masks,
                      const Eigen::VectorXd& x, double y);

/// Hessian-vector product of the squared loss by central differences of
/// grad_params with step 1e-4 (1 + |direction|_inf). One hidden layer only.
NetParams hvp(const NetSpec& spec, const NetParams& params, const Eigen::VectorXd& x, double y,
              const NetParams& direction);

}  // namespace pai
