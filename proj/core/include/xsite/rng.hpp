#pragma once

// Counter-based random streams. A stream is identified by a key derived from
// (seed, a, b, c); draw k of a stream is a pure function of (key, k), so any
// user's draws can be regenerated without replaying other users.
//
// Distributions are implemented here rather than taken from <random> because
// the standard distributions are not bit-reproducible across library
// implementations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace xsite {

/// SplitMix64 / murmur3-style avalanche finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Purpose tags used to keep streams for different draws disjoint.
enum class StreamTag : std::uint64_t {
  Population = 0x706f70,
  Site1 = 0x733031,
  Site2 = 0x733032,
  Replication = 0x726570,
  Resample = 0x727370,
  Historical = 0x686973,
};

class CounterStream {
 public:
  using result_type = std::uint64_t;

  explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v = (*this)();
    while (v >= limit) v = (*this)();
    return v % bound;
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

constexpr std::uint64_t stream_key(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                                   std::uint64_t b = 0) noexcept {
  std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  k = mix64(k ^ static_cast<std::uint64_t>(tag));
  k = mix64(k ^ (a + 0x3c6ef372fe94f82bULL));
  return mix64(k ^ (b + 0xa54ff53a5f1d36f1ULL));
}

inline CounterStream make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                                 std::uint64_t b = 0) noexcept {
  return CounterStream(stream_key(seed, tag, a, b));
}

/// Seed for replication `rep` of an experiment seeded with `seed`.
constexpr std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep) noexcept {
  return stream_key(seed, StreamTag::Replication, rep);
}

}  // namespace xsite
