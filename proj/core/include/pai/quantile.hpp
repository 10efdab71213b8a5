#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "pai/rng.hpp"

namespace pai {

/// Sorted sample of a distribution, queried through the generalised
/// quantile Q(v) = inf{y : F_N(y) >= v} of its empirical CDF.
class QuantileTable {
 public:
  /// Sorts `samples`; throws ArgumentError when empty.
  explicit QuantileTable(std::vector<double> samples);

  /// samples[ceil(N v) - 1] for v in (0, 1]; v <= 0 maps to the minimum.
  double query(double v) const noexcept;

  std::size_t size() const noexcept { return samples_.size(); }
  double min() const noexcept { return samples_.front(); }
  double max() const noexcept { return samples_.back(); }
  const std::vector<double>& samples() const noexcept { return samples_; }

 private:
  std::vector<double> samples_;
};

using Sampler = std::function<double(Rng64&)>;

/// N i.i.d. draws of `sampler` using `rng`, sorted.
QuantileTable mc_quantile_table(const Sampler& sampler, std::size_t n, Rng64& rng);

/// One draw per stratum: inverse_cdf((i + U_i) / N) for i = 0..N-1.
QuantileTable stratified_quantile_table(const std::function<double(double)>& inverse_cdf, std::size_t n,
                                        Rng64& rng);

}  // namespace pai
