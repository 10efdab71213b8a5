#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "pai/activation.hpp"
#include "pai/grid.hpp"
#include "pai/rng.hpp"
#include "pai/saliency.hpp"

namespace pai {

enum class CutMethod { Exact, Heuristic };

/// Cut norm ||B||_cut = (1/dn) max_{S,T} |sum_{S x T} B_ij| with its maximising rectangle.
struct CutResult {
  double value = 0.0;
  std::vector<std::size_t> rows;  ///< certificate S, ascending
  std::vector<std::size_t> cols;  ///< certificate T, ascending
  CutMethod method = CutMethod::Exact;
  double upper_bound = 0.0;  ///< sigma_max(B) / sqrt(dn)
};

/// Largest min(d, n) handled by exhaustive enumeration.
inline constexpr std::size_t kExactCutBudget = 22;

/// (1/dn) |sum over rows x cols of B|, summed row-major over the certificate.
double evaluate_cut(const Eigen::MatrixXd& b, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& cols);

/// Largest singular value. Exact symmetric eigensolve of the smaller Gram
/// matrix when min(d, n) <= 2048, power iteration beyond. Power iteration
/// converges from below, so the large-matrix value can undershoot slightly.
double spectral_norm(const Eigen::MatrixXd& b);

/// Power iteration on B^T B from a fixed pseudo-random start.
double spectral_norm_power(const Eigen::MatrixXd& b, int iterations = 200, double tol = 1e-10);

/// Exact cut norm: every subset of the smaller side, the other side chosen
/// optimally. Throws BudgetError when min(d, n) > kExactCutBudget.
CutResult cut_norm_exact(const Eigen::MatrixXd& b);

/// Alternating maximisation from `restarts` starting row sets, one chain per
/// sign. Returns a lower bound on the exact value.
CutResult cut_norm_heuristic(const Eigen::MatrixXd& b, std::size_t restarts, Rng64& rng);

/// Exact within budget, heuristic with 32 restarts above it.
CutResult cut_norm(const Eigen::MatrixXd& b, Rng64& rng);

/// Cut norm of A - B for two kernels aligned by the sorted-factor convention.
/// An upper bound on the bipartite cut distance, which would also optimise
/// over relabelings.
CutResult cut_distance_sorted(const GridKernel& a, const GridKernel& b);

struct SweepConfig {
  PaiMethod method = PaiMethod::Snip;
  Activation activation{};
  double rho = 0.2;
  std::vector<std::size_t> widths;
  std::size_t seeds = 10;
  std::size_t grid = 32;
  std::size_t depth = 1;
  std::size_t mc_samples = 1'000'000;
  /// Resolution of the theoretical kernel before pooling; 0 picks the
  /// largest multiple of `grid` not above 512 (at least `grid`).
  std::size_t theory_resolution = 0;
  double label = 0.0;
};

struct SweepPoint {
  std::size_t width = 0;
  std::size_t layer = 1;
  double distance = 0.0;
  double upper_bound = 0.0;
  double proxy = 0.0;  ///< sqrt(log(2n) / n)
};

struct SweepResult {
  std::vector<GridKernel> theoretical;             ///< one per layer
  std::vector<std::vector<GridKernel>> empirical;  ///< [width index][layer]
  std::vector<SweepPoint> points;                  ///< width-major, then layer
};

/// Theoretical kernel built once (master.derive(0)), empirical graphon per
/// width (master.derive(1 + width index)), both pooled to `grid`.
SweepResult convergence_sweep(const SweepConfig& config, const Rng64& master);

/// Theoretical kernel of every layer at `resolution`, pooled to `grid`.
/// Layer l draws its Monte Carlo tables from rng.derive(l); thresholds are
/// appended to `taus` when given.
std::vector<GridKernel> theoretical_grids(PaiMethod method, Activation act, double rho,
                                          std::size_t depth, std::size_t grid,
                                          std::size_t resolution, std::size_t mc_samples,
                                          const Rng64& rng, std::vector<double>* taus = nullptr);

/// Default pre-pooling resolution: the largest multiple of `grid` not above
/// 512, and at least `grid`.
std::size_t default_theory_resolution(std::size_t grid);

}  // namespace pai
