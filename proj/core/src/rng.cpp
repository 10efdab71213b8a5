#include "pai/rng.hpp"

#include <cmath>

namespace pai {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

constexpr std::uint64_t child_key(std::uint64_t parent, std::uint64_t id) noexcept {
  return splitmix64_mix(parent ^ splitmix64_mix(id + kGolden));
}

}  // namespace

Rng64::Rng64(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), key_(child_key(seed, stream)) {
  init_state();
}

Rng64::Rng64(FromKey, std::uint64_t seed, std::uint64_t key) noexcept : seed_(seed), key_(key) {
  init_state();
}

void Rng64::init_state() noexcept {
  std::uint64_t x = key_;
  for (auto& word : s_) {
    x += kGolden;
    word = splitmix64_mix(x);
  }
}

Rng64 Rng64::derive(std::uint64_t id) const noexcept {
  return Rng64(FromKey{}, seed_, child_key(key_, id));
}

Rng64::result_type Rng64::operator()() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng64::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng64::uniform_open() noexcept {
  return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
}

double Rng64::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t Rng64::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless rejection.
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace pai
