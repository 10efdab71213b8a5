#include "pai/limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pai/errors.hpp"
#include "pai/special.hpp"

namespace pai {

namespace {

double link_value(NoiseKind noise, LinkKind kind, double tau, double z) {
  if (z <= 0.0) return 0.0;
  if (noise == NoiseKind::Uniform) return std::clamp(1.0 - tau / z, 0.0, 1.0);
  const double r = tau / z;
  if (kind == LinkKind::Magnitude) return std::erfc(r / std::numbers::sqrt2);
  return 0.5 * std::erfc(r / std::numbers::sqrt2);
}

struct Axes {
  std::vector<double> phi;
  std::vector<double> psi;
};

Axes axis_values(const LimitModel& model, std::size_t g) {
  if (g == 0) throw ArgumentError("grid size must be positive");
  if (!model.phi_profile || !model.psi_quantile) throw ArgumentError("LimitModel is incomplete");
  Axes ax{std::vector<double>(g), std::vector<double>(g)};
  for (std::size_t i = 0; i < g; ++i) {
    const double c = GridKernel::center(i, g);
    ax.phi[i] = model.phi_profile(c);
    ax.psi[i] = model.psi_quantile->query(c);
  }
  return ax;
}

double grid_density(const LimitModel& model, const Axes& ax, double tau) {
  double sum = 0.0;
  for (double p : ax.phi)
    for (double q : ax.psi) sum += link_value(model.noise, model.link, tau, p * q);
  const auto g = static_cast<double>(ax.phi.size());
  return sum / (g * g);
}

QuantileTable activation_product_table(Activation act, double nu, std::size_t mc_n, Rng64& rng) {
  return mc_quantile_table(
      [act, nu](Rng64& r) {
        const double a = r.normal();
        const double h = r.normal();
        return std::fabs(a) * std::fabs(act.d1(nu * h));
      },
      mc_n, rng);
}

}  // namespace

double link(const LimitModel& model, double z) {
  if (z < 0.0) throw ArgumentError("link: signal strength must be non-negative");
  if (!model.has_tau()) throw ArgumentError("link: threshold is unset");
  return link_value(model.noise, model.link, model.tau, z);
}

LimitModel constant_model(NoiseKind noise, LinkKind link) {
  LimitModel m;
  m.phi_profile = [](double) { return 1.0; };
  m.psi_quantile = std::make_shared<const QuantileTable>(std::vector<double>{1.0});
  m.noise = noise;
  m.link = link;
  return m;
}

LimitModel snip_limit_model(Activation act, std::size_t mc_n, Rng64& rng, double nu) {
  LimitModel m;
  m.phi_profile = [](double u) { return half_normal_quantile(u); };
  m.psi_quantile = std::make_shared<const QuantileTable>(activation_product_table(act, nu, mc_n, rng));
  m.noise = NoiseKind::HalfNormal;
  m.link = LinkKind::Magnitude;
  return m;
}

LimitModel deep_layer2_model(Activation act, std::size_t mc_n, Rng64& rng) {
  if (mc_n == 0) throw ArgumentError("deep_layer2_model: sample count must be positive");
  Rng64 phi_rng = rng.derive(0);
  std::vector<double> post(mc_n);
  double second_moment = 0.0;
  for (auto& v : post) {
    const double s = act.value(phi_rng.normal());
    second_moment += s * s;
    v = std::fabs(s);
  }
  const double nu = std::sqrt(second_moment / static_cast<double>(mc_n));
  auto phi_table = std::make_shared<const QuantileTable>(std::move(post));

  Rng64 psi_rng = rng.derive(1);
  LimitModel m;
  m.phi_profile = [phi_table](double u) { return phi_table->query(u); };
  m.psi_quantile = std::make_shared<const QuantileTable>(activation_product_table(act, nu, mc_n, psi_rng));
  m.noise = NoiseKind::HalfNormal;
  m.link = LinkKind::Magnitude;
  return m;
}

LimitModel theoretical_model(PaiMethod method, Activation act, std::size_t mc_n, Rng64& rng,
                             std::size_t layer, std::size_t depth) {
  if (depth != 1 && depth != 2) throw FeatureError("theoretical_model: depth must be 1 or 2");
  if (layer < 1 || layer > depth) throw ArgumentError("theoretical_model: layer out of range");
  switch (method) {
    case PaiMethod::Random:
      return constant_model(NoiseKind::Uniform);
    case PaiMethod::Magnitude:
      return constant_model(NoiseKind::HalfNormal);
    case PaiMethod::Synflow: {
      // phi averages many |theta| paths and tends to a constant; psi is |a|
      // in the last hidden layer and likewise a constant before it.
      LimitModel m = constant_model(NoiseKind::HalfNormal);
      if (layer == depth)
        m.psi_quantile = std::make_shared<const QuantileTable>(
            mc_quantile_table([](Rng64& r) { return std::fabs(r.normal()); }, mc_n, rng));
      return m;
    }
    case PaiMethod::Snip:
      return layer == 1 ? snip_limit_model(act, mc_n, rng) : deep_layer2_model(act, mc_n, rng);
    case PaiMethod::GraspMagnitude:
    case PaiMethod::GraspSigned: {
      if (depth != 1) throw FeatureError("theoretical_model: GraSP is one-hidden-layer only");
      LimitModel m = snip_limit_model(act, mc_n, rng);
      if (method == PaiMethod::GraspSigned) m.link = LinkKind::Signed;
      return m;
    }
  }
  throw ArgumentError("theoretical_model: unknown method");
}

GridKernel evaluate_grid(const LimitModel& model, std::size_t g) {
  if (!model.has_tau()) throw ArgumentError("evaluate_grid: threshold is unset");
  const Axes ax = axis_values(model, g);
  const auto gi = static_cast<Eigen::Index>(g);
  Eigen::MatrixXd cells(gi, gi);
  for (std::size_t iv = 0; iv < g; ++iv)
    for (std::size_t iu = 0; iu < g; ++iu)
      cells(static_cast<Eigen::Index>(iu), static_cast<Eigen::Index>(iv)) =
          link_value(model.noise, model.link, model.tau, ax.phi[iu] * ax.psi[iv]);
  return GridKernel(std::move(cells));
}

double solve_threshold(const LimitModel& model, double rho, std::size_t g) {
  if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("solve_threshold: rho must lie in (0, 1)");
  const Axes ax = axis_values(model, g);
  constexpr double kTol = 1e-6;

  const double at_zero = grid_density(model, ax, 0.0);
  if (at_zero < rho - kTol)
    throw NumericError("solve_threshold: density " + std::to_string(rho) +
                       " is unreachable (maximum " + std::to_string(at_zero) + ")");
  if (std::fabs(at_zero - rho) <= kTol) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (grid_density(model, ax, hi) >= rho) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw NumericError("solve_threshold: could not bracket the threshold");
  }
  // Density is non-increasing in tau: density(lo) >= rho > density(hi).
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double dens = grid_density(model, ax, mid);
    if (dens >= rho)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  const double tau = 0.5 * (lo + hi);
  if (std::fabs(grid_density(model, ax, tau) - rho) > kTol)
    throw NumericError("solve_threshold: bisection did not reach density tolerance");
  return tau;
}

}  // namespace pai
