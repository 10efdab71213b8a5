#pragma once

#include <cstddef>
#include <span>

namespace pai {

/// Error function. Backed by std::erf (sub-ulp accurate on IEEE doubles).
double erf(double x) noexcept;

/// Inverse error function on (-1, 1). Throws DomainError for |u| >= 1.
double erfinv(double u);

/// Standard normal CDF, (1 + erf(x/sqrt 2)) / 2.
double std_normal_cdf(double x) noexcept;

/// Quantile of |N(0,1)|: sqrt(2) * erfinv(u) for u in [0, 1).
double half_normal_quantile(double u);

/// Number of entries kept by top-rho selection out of `total`: floor(rho * total).
///
/// A 1e-9 guard absorbs products such as 0.29 * 100 = 28.999999999999996.
std::size_t top_count(double rho, std::size_t total);

/// Empirical (1 - rho)-quantile: the element at sorted ascending position
/// ceil((1 - rho) N) (1-based), i.e. N - floor(rho N), clamped to at least 1.
/// At most floor(rho N) values are strictly greater than the result.
double empirical_top_quantile(std::span<const double> values, double rho);

}  // namespace pai
