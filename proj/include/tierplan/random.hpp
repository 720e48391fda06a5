#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tierplan {

/// SplitMix64 step. Used for seed derivation and stable hashing of ids.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a over the bytes of `s`, mixed with `seed`.
constexpr std::uint64_t hash_string(std::string_view s, std::uint64_t seed = 0) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(h);
}

/// Per-stage seed derived from the single top-level run seed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) noexcept {
  return hash_string(stage, root);
}

/// Maps the top 53 bits of a 64-bit word onto [0, 1).
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Small deterministic generator (xoshiro256**). Unlike the <random>
/// distributions, every draw below is specified bit-for-bit, so corpora are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x = splitmix64(x);
      s = x;
    }
  }

  std::uint64_t next() noexcept {
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

  double uniform() noexcept { return to_unit_interval(next()); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }

  double log_uniform(double lo, double hi) noexcept {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace tierplan
