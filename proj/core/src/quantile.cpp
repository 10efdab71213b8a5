#include "pai/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "pai/errors.hpp"

namespace pai {

QuantileTable::QuantileTable(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw ArgumentError("QuantileTable: need at least one sample");
  std::sort(samples_.begin(), samples_.end());
}

double QuantileTable::query(double v) const noexcept {
  const auto n = samples_.size();
  if (!(v > 0.0)) return samples_.front();
  if (v >= 1.0) return samples_.back();
  const double pos = std::ceil(static_cast<double>(n) * v);
  const auto idx = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
  return samples_[std::min(idx, n - 1)];
}

QuantileTable mc_quantile_table(const Sampler& sampler, std::size_t n, Rng64& rng) {
  if (n == 0) throw ArgumentError("mc_quantile_table: sample count must be positive");
  std::vector<double> draws(n);
  for (auto& d : draws) d = sampler(rng);
  return QuantileTable(std::move(draws));
}

QuantileTable stratified_quantile_table(const std::function<double(double)>& inverse_cdf, std::size_t n,
                                        Rng64& rng) {
  if (n == 0) throw ArgumentError("stratified_quantile_table: sample count must be positive");
  std::vector<double> draws(n);
  const double step = 1.0 / static_cast<double>(n);
  const double below_one = std::nextafter(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    draws[i] = inverse_cdf(std::min((static_cast<double>(i) + rng.uniform()) * step, below_one));
  return QuantileTable(std::move(draws));
}

}  // namespace pai
