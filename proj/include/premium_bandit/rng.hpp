#pragma once

#include <cstdint>
#include <cmath>

namespace pbandit {

// Deterministic substream RNG.
//
// Every replication owns a handful of named substreams derived from
// (seed, stream id). Draw transforms are implemented by hand on top of the
// raw 64-bit words so that identical (config, seed) pairs produce identical
// results on every platform, and so that paired runs (e.g. delayed vs
// non-delayed) can consume identical demand/claims noise while only the
// delay stream differs.

enum class Stream : std::uint64_t {
  demand = 1,
  claims = 2,
  delay = 3,
  truth = 4,
};

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class SubStream {
 public:
  SubStream(std::uint64_t seed, Stream id) noexcept
      : state_(mix64(mix64(seed + golden_gamma) +
                     static_cast<std::uint64_t>(id))) {}

  std::uint64_t bits() noexcept {
    state_ += golden_gamma;
    return mix64(state_);
  }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform() noexcept {
    return static_cast<double>(bits() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe under log.
  double uniform_pos() noexcept {
    return static_cast<double>((bits() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on (0,1); safe under logit.
  double uniform_open() noexcept {
    return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two words.
  double normal() noexcept {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Centred logistic with scale s; consumes one word.
  double logistic(double s) noexcept {
    const double u = uniform_open();
    return s * std::log(u / (1.0 - u));
  }

  // Uniform integer on {0, ..., n}; consumes one word.
  int uniform_int(int n) noexcept {
    const int v = static_cast<int>(uniform() * (static_cast<double>(n) + 1.0));
    return v > n ? n : v;
  }

 private:
  static constexpr double two_pi = 6.283185307179586476925286766559;
  std::uint64_t state_;
};

}  // namespace pbandit
