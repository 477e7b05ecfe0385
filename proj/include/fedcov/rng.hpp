#pragma once

#include <cmath>
#include <cstdint>

namespace fedcov {

/// SplitMix64 generator. Chosen as the project-wide seeded source because it
/// is a handful of integer operations, has no state beyond one word, and is
/// trivially reproducible in any language (oracle scripts, offline decoders).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1): next word divided by 2^64.
  double next_unit() { return static_cast<double>(next()) * 0x1.0p-64; }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal via Box-Muller on two consecutive words
  /// (cosine branch only, so each draw consumes exactly two words).
  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Integer in [0, n) via the unit-interval map floor(u/2^64 * n),
  /// clamped so a unit value rounded up to 1.0 cannot escape the range.
  std::uint64_t next_below(std::uint64_t n) {
    auto idx = static_cast<std::uint64_t>(next_unit() * static_cast<double>(n));
    return idx >= n ? n - 1 : idx;
  }

 private:
  std::uint64_t state_;
};

/// One SplitMix64 output step applied to a raw word; used to turn structured
/// seed material (master ^ ids) into a well-mixed stream seed.
inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream tags keep independent consumers (training, noise, data, ...) on
// disjoint seed streams even when client id and round coincide.
namespace seed_stream {
inline constexpr std::uint64_t kTrain = 0x01;
inline constexpr std::uint64_t kNoise = 0x02;
inline constexpr std::uint64_t kData = 0x03;
inline constexpr std::uint64_t kInit = 0x04;
inline constexpr std::uint64_t kFactor = 0x06;
inline constexpr std::uint64_t kPartition = 0x07;
}  // namespace seed_stream

/// Per-client, per-round seed: master XOR client XOR round * golden ratio,
/// scrambled once. Adding clients or rounds never perturbs other streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t client_id = 0,
                                 std::uint64_t round_index = 0) {
  return mix64(mix64(master ^ stream) ^ client_id ^
               round_index * 0x9E3779B97F4A7C15ULL);
}

}  // namespace fedcov
