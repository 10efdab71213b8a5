#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pai/grid.hpp"
#include "pai/net.hpp"
#include "pai/rng.hpp"

namespace pai {

/// Pruning-at-initialisation scoring rules.
enum class PaiMethod { Snip, GraspMagnitude, GraspSigned, Synflow, Magnitude, Random };

std::string_view method_name(PaiMethod m) noexcept;
/// "snip", "grasp-mag", "grasp-signed", "synflow", "magnitude", "random".
PaiMethod parse_method(std::string_view name);

enum class GraspVariant { Magnitude, Signed };
enum class HessianPath { Analytic, HvpOracle };

/// Factorised saliency S_ij = phi_i * psi_j * xi_abs_ij of one layer.
///
/// The product reproduces the method's magnitude score up to one global
/// positive factor. Signed rules additionally carry the raw signed score,
/// which is what make_mask ranks.
struct SaliencyFactors {
  Eigen::VectorXd phi;
  Eigen::VectorXd psi;
  Eigen::MatrixXd xi_abs;
  std::optional<Eigen::MatrixXd> signed_score;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(xi_abs.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(xi_abs.cols()); }
  /// phi_i psi_j xi_abs_ij.
  Eigen::MatrixXd magnitude() const;
  /// The quantity make_mask ranks: signed_score when present, else magnitude().
  Eigen::MatrixXd ranking_score() const;
};

/// SNIP: phi = |x|, psi = |a| |sigma'(h)|, xi = |theta|. One hidden layer.
SaliencyFactors snip_scores(const NetSpec& spec, const NetParams& params, const Eigen::VectorXd& x,
                            double y);

/// Pieces of Hg = c_n g + R for the first-layer weights of a one-hidden-layer net.
struct GraspDecomposition {
  double delta = 0.0;           ///< f(x) - y
  double c_n = 0.0;             ///< |J|^2
  Eigen::MatrixXd gradient;     ///< g = dL/dtheta
  Eigen::MatrixXd remainder;    ///< R = delta^2 (d^2 f) J
  Eigen::MatrixXd hg;           ///< c_n g + R
};

GraspDecomposition grasp_decomposition(const NetSpec& spec, const NetParams& params,
                                       const Eigen::VectorXd& x, double y);

/// GraSP scores |theta (Hg)| (magnitude) or theta (Hg) (signed), with Hg from
/// the closed-form decomposition or from the finite-difference HVP.
///
/// phi and psi are the SNIP factors; the column-only correction
/// |1 + R_ij / (c_n g_ij)| is carried in xi_abs so the product is exact.
SaliencyFactors grasp_scores(const NetSpec& spec, const NetParams& params,
                             const Eigen::VectorXd& x, double y, GraspVariant variant,
                             HessianPath path = HessianPath::Analytic);

/// One-shot SynFlow: phi = 1, psi = |a|, xi = |theta|. One hidden layer.
SaliencyFactors synflow_scores(const NetSpec& spec, const NetParams& params);

SaliencyFactors magnitude_scores(const Eigen::MatrixXd& theta);
SaliencyFactors random_scores(std::size_t rows, std::size_t cols, Rng64& rng);

/// Per-layer factors of a method on a network of any supported depth
/// (SNIP, SynFlow, Magnitude, Random at depth 1 or 2; GraSP at depth 1).
std::vector<SaliencyFactors> layer_scores(PaiMethod method, const NetSpec& spec,
                                          const NetParams& params, const Eigen::VectorXd& x,
                                          double y, Rng64& rng);

/// Keeps exactly floor(rho * rows * cols) entries: everything strictly above
/// the k-th largest ranking score, plus threshold ties chosen uniformly at
/// random with `rng`. Throws ArgumentError when k = 0.
Mask make_mask(const SaliencyFactors& factors, double rho, Rng64& rng);

/// Mask as a 0/1 matrix with rows sorted by row_factors and columns by
/// col_factors, both ascending (stable, ties keep index order).
Eigen::MatrixXd sorted_mask(const Mask& mask);

/// A freshly initialised network pruned by one method.
struct PrunedNetwork {
  NetSpec spec;
  NetParams params;
  Eigen::VectorXd x;  ///< scoring input
  std::vector<Mask> masks;
};

/// Draws x ~ N(0, I_d) and N(0,1) parameters from `rng`, scores every hidden
/// layer at (x, label) and prunes each to density rho.
PrunedNetwork sample_pruned_network(PaiMethod method, const NetSpec& spec, double rho, double label,
                                    const Rng64& rng);

struct GraphonExperiment {
  PaiMethod method = PaiMethod::Snip;
  Activation activation{};
  double rho = 0.2;
  std::size_t width = 256;  ///< d = n_1 (= n_2 for depth 2)
  std::size_t seeds = 1;
  std::size_t grid = 32;
  double label = 0.0;
};

struct EmpiricalGraphon {
  GridKernel probs;
  std::size_t width = 0;
  std::size_t seeds = 0;
  PaiMethod method = PaiMethod::Snip;
  Activation activation{};
  double rho = 0.0;
};

/// Seed-averaged sorted masks of a one-hidden-layer network, block-averaged to
/// grid x grid. Seed s uses master.derive(s).
EmpiricalGraphon empirical_graphon(const GraphonExperiment& exp, const Rng64& master);

/// Same for the two layers of a d -> n -> n -> 1 network; layer 2 rows are
/// sorted by |sigma(h^(1))|.
std::pair<EmpiricalGraphon, EmpiricalGraphon> empirical_graphon_deep(const GraphonExperiment& exp,
                                                                     const Rng64& master);

/// Spearman correlation of the flattened entries, ties at average rank.
/// Throws ArgumentError for shape mismatch, fewer than 2 entries, or a constant input.
double rank_correlation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace pai
