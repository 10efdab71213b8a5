#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pai/grid.hpp"
#include "pai/net.hpp"
#include "pai/rng.hpp"

namespace pai {

/// Suffix rectangle [iu_begin, G) x [iv_begin, G) of a grid kernel.
struct ActiveRectangle {
  std::size_t iu_begin = 0;
  std::size_t iv_begin = 0;
  std::size_t grid = 0;
  double beta = 0.0;    ///< (G - iu_begin) / G, measure of the row range
  double alpha = 0.0;   ///< (G - iv_begin) / G, measure of the column range
  double p_star = 0.0;  ///< smallest cell inside
};

/// Largest-area suffix rectangle whose cells are all >= p_floor; ties go to
/// the smallest iu_begin. Empty when no cell qualifies. Throws ArgumentError
/// unless 0 < p_floor < 1.
std::optional<ActiveRectangle> find_active_rectangle(const GridKernel& w, double p_floor);

struct DenseCore {
  std::vector<std::size_t> rows;  ///< I
  std::vector<std::size_t> cols;  ///< J, the first ntilde good columns
  std::size_t n_good = 0;         ///< columns j with M_ij = 1 for every i in I
};

/// Throws ArgumentError for ntilde = 0 or rows out of range and
/// InsufficientCoreError when fewer than ntilde columns are good.
DenseCore count_dense_core(const Mask& mask, const std::vector<std::size_t>& rows, std::size_t ntilde);

/// Indices of the k largest factors (ties keep index order), ascending.
/// Throws ArgumentError when k exceeds the number of factors.
std::vector<std::size_t> top_k_rows(const Eigen::VectorXd& factors, std::size_t k);

/// Number of good columns without the ntilde requirement.
std::size_t count_good_columns(const Mask& mask, const std::vector<std::size_t>& rows);

struct ChernoffPrediction {
  double mu_lower = 0.0;         ///< (alpha/2) n (p_star/2)^k
  double fail_prob_upper = 0.0;  ///< exp(-mu_lower / 8)
};

/// Throws ArgumentError unless n, alpha, p_star, k > 0 and p_star <= 1.
ChernoffPrediction chernoff_predictor(double n, double alpha, double p_star, std::size_t k);

/// Random tanh features u -> sum_r a_r tanh(theta_r . u + b_r) on [-1, 1]^k.
struct FeatureApproximator {
  Eigen::MatrixXd theta;  ///< ntilde x k
  Eigen::VectorXd bias;   ///< ntilde
  Eigen::VectorXd a;      ///< ntilde
  double sup_error = 0.0;

  std::size_t features() const noexcept { return static_cast<std::size_t>(a.size()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(theta.cols()); }
  double operator()(std::span<const double> u) const;
};

using Target = std::function<double(std::span<const double>)>;

struct FitOptions {
  double theta_scale = 2.0;    ///< theta_r ~ N(0, I) * theta_scale
  double ridge = 1e-8;
  std::size_t test_grid = 0;   ///< points per axis of the error lattice; 0 means 2 train_grid + 1
};

/// Draws theta_r then b_r ~ U[-2, 2] for r = 0..ntilde-1 from `rng` and fits
/// a by ridge least squares on the train_grid^k lattice of [-1, 1]^k.
/// sup_error is the largest absolute error on the test lattice.
/// Throws ArgumentError for k, ntilde or train_grid of zero (train_grid >= 2)
/// and NumericError for a non-finite solution.
FeatureApproximator fit_k_feature_approximator(const Target& f, std::size_t k, std::size_t ntilde,
                                               std::size_t train_grid, Rng64& rng,
                                               const FitOptions& options = {});

/// Same fit with the features given.
FeatureApproximator fit_with_features(const Target& f, Eigen::MatrixXd theta, Eigen::VectorXd bias,
                                      std::size_t train_grid, const FitOptions& options = {});

/// Points of the lattice {-1, -1 + 2/(g-1), ..., 1}^k, one per row, first coordinate slowest.
Eigen::MatrixXd lattice(std::size_t k, std::size_t g);

/// One-hidden-layer parameters whose masked output equals `approx` at x_I.
/// Neuron J[r] gets weights sqrt(d) theta_r on rows I, bias b_r and output
/// weight sqrt(n) a_r; every other parameter is 0. Requires a Tanh spec with
/// biases. Throws ContractError when some M_ij = 0 on I x J and
/// ArgumentError on size mismatches.
NetParams embed_into_mask(const NetSpec& spec, const Mask& mask, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols, const FeatureApproximator& approx);

}  // namespace pai
