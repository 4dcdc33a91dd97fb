#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace noisecal {

/// xoshiro256** seeded through splitmix64.
///
/// Satisfies UniformRandomBitGenerator so it plugs into <random>
/// distributions. Streams are cheap to copy and are never shared between
/// threads; use derive() to obtain independent child streams.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  /// Child stream keyed by `stream`; independent of how much of the parent
  /// has been consumed.
  Rng derive(std::uint64_t stream) const {
    std::uint64_t sm = seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return Rng(splitmix64(sm));
  }

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t seed_;
  std::uint64_t state_[4]{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace noisecal
