#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>

#include "pai/activation.hpp"
#include "pai/grid.hpp"
#include "pai/quantile.hpp"
#include "pai/rng.hpp"
#include "pai/saliency.hpp"

namespace pai {

/// Law of the edge noise |xi|.
enum class NoiseKind { HalfNormal, Uniform };
/// Magnitude rules keep z |xi| > tau; signed rules keep z xi > tau.
enum class LinkKind { Magnitude, Signed };

/// Deterministic limit W(u, v) = P(phi(u) Q_psi(v) |xi| > tau).
struct LimitModel {
  std::function<double(double)> phi_profile;          ///< non-decreasing on (0, 1)
  std::shared_ptr<const QuantileTable> psi_quantile;  ///< Q_psi
  NoiseKind noise = NoiseKind::HalfNormal;
  LinkKind link = LinkKind::Magnitude;
  double tau = std::numeric_limits<double>::quiet_NaN();

  bool has_tau() const noexcept { return tau == tau; }
  LimitModel with_tau(double t) const {
    LimitModel m = *this;
    m.tau = t;
    return m;
  }
};

/// Retention probability g(tau, z) for signal strength z >= 0:
///   half-normal magnitude: 1 - erf(tau / (z sqrt 2))
///   half-normal signed:    1 - Phi(tau / z)
///   uniform:               clamp(1 - tau / z, 0, 1)
/// and 0 at z = 0. Throws ArgumentError for z < 0 or an unset tau.
double link(const LimitModel& model, double z);

/// phi = 1, Q_psi = 1.
LimitModel constant_model(NoiseKind noise, LinkKind link = LinkKind::Magnitude);

/// First-layer SNIP limit: phi(u) = sqrt(2) erfinv(u) and Q_psi the Monte
/// Carlo quantile table of |a| |sigma'(nu h)| with a, h i.i.d. N(0,1).
LimitModel snip_limit_model(Activation act, std::size_t mc_n, Rng64& rng, double nu = 1.0);

/// Second-layer SNIP limit of a d -> n -> n -> 1 network: phi is the quantile
/// function of |sigma(Z)|, Z ~ N(0,1); Q_psi is |a| |sigma'(nu_2 h)| with
/// nu_2^2 = E[sigma(Z)^2], the limiting second-layer pre-activation variance.
LimitModel deep_layer2_model(Activation act, std::size_t mc_n, Rng64& rng);

/// Limit model of `method` for hidden layer `layer` of a network with
/// `depth` (1 or 2) hidden layers, tau unset.
LimitModel theoretical_model(PaiMethod method, Activation act, std::size_t mc_n, Rng64& rng,
                             std::size_t layer = 1, std::size_t depth = 1);

/// cells[iu][iv] = link(phi(u_c) Q_psi(v_c)) at cell centres. Requires tau.
GridKernel evaluate_grid(const LimitModel& model, std::size_t g);

/// Bisection for tau with |mean(evaluate_grid(model, g)) - rho| <= 1e-6.
/// Throws NumericError when rho is unreachable or 200 iterations do not converge.
double solve_threshold(const LimitModel& model, double rho, std::size_t g);

}  // namespace pai
