#include "pai/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pai/errors.hpp"

namespace pai {

double erf(double x) noexcept { return std::erf(x); }

double erfinv(double u) {
  if (!(std::fabs(u) < 1.0)) throw DomainError("erfinv: argument must satisfy |u| < 1");
  if (u == 0.0) return 0.0;

  // Giles (2010) single-precision starting point.
  const double w = -std::log((1.0 - u) * (1.0 + u));
  double p;
  if (w < 5.0) {
    const double t = w - 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * t;
    p = -3.5233877e-06 + p * t;
    p = -4.39150654e-06 + p * t;
    p = 0.00021858087 + p * t;
    p = -0.00125372503 + p * t;
    p = -0.00417768164 + p * t;
    p = 0.246640727 + p * t;
    p = 1.50140941 + p * t;
  } else {
    const double t = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * t;
    p = 0.00134934322 + p * t;
    p = -0.00367342844 + p * t;
    p = 0.00573950773 + p * t;
    p = -0.0076224613 + p * t;
    p = 0.00943887047 + p * t;
    p = 1.00167406 + p * t;
    p = 2.83297682 + p * t;
  }
  double x = p * u;

  // Halley refinement on erf(x) - u; two steps take the 1e-7 start to full precision.
  constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;
  for (int step = 0; step < 2; ++step) {
    const double err = std::erf(x) - u;
    const double deriv = kTwoOverSqrtPi * std::exp(-x * x);
    if (deriv == 0.0) break;
    const double newton = err / deriv;
    x -= newton / (1.0 + x * newton);
  }
  return x;
}

double std_normal_cdf(double x) noexcept {
  return 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
}

double half_normal_quantile(double u) {
  if (!(u >= 0.0) || !(u < 1.0)) throw DomainError("half_normal_quantile: u must lie in [0, 1)");
  return std::numbers::sqrt2 * erfinv(u);
}

std::size_t top_count(double rho, std::size_t total) {
  const double raw = std::floor(rho * static_cast<double>(total) + 1e-9);
  if (raw <= 0.0) return 0;
  return std::min(total, static_cast<std::size_t>(raw));
}

double empirical_top_quantile(std::span<const double> values, double rho) {
  if (values.empty()) throw ArgumentError("empirical_top_quantile: empty input");
  if (!(rho > 0.0 && rho <= 1.0)) throw ArgumentError("empirical_top_quantile: rho must lie in (0, 1]");
  const std::size_t n = values.size();
  const std::size_t index = std::max<std::size_t>(n - top_count(rho, n), 1) - 1;
  std::vector<double> copy(values.begin(), values.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(index), copy.end());
  return copy[index];
}

}  // namespace pai
