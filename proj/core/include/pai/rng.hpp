#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace pai {

/// Finalising mixer of SplitMix64 (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/*!
 * Deterministic xoshiro256** generator with keyed substreams.
 *
 * A stream is identified by a 64-bit key. The root stream of a seed has
 * key = mix(seed ^ mix(stream + 0x9e3779b97f4a7c15)), and derive(id) on a
 * stream with key k yields the stream with key mix(k ^ mix(id + 0x9e37...)).
 * The four state words are the first four outputs of SplitMix64 started at
 * the key. Only integer arithmetic is involved, so the integer stream is
 * identical on every platform.
 *
 * Normals use the Marsaglia polar method; the second variate of each pair
 * is cached in the generator.
 */
class Rng64 {
 public:
  using result_type = std::uint64_t;

  explicit Rng64(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  /// Independent child stream keyed by (this stream, id). Does not advance *this.
  Rng64 derive(std::uint64_t id) const noexcept;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal.
  double normal() noexcept;
  /// Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  struct FromKey {};
  Rng64(FromKey, std::uint64_t seed, std::uint64_t key) noexcept;
  void init_state() noexcept;

  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pai
