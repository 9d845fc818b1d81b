#pragma once

#include <cstdint>
#include <random>

namespace prm {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seedable generator with a fixed, portable algorithm.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard, seeded with splitmix64(seed ^ splitmix64(stream)). Stream i of a
/// seed drives round/resample i, so rounds can run in any order or in
/// parallel. Distributions are implemented here rather than with <random>
/// distributions, whose algorithms are implementation-defined:
///   uniform()  = (next() >> 11) * 2^-53
///   below(n)   = rejection sampling on next() with limit 2^64 - (2^64 mod n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(seed ^ splitmix64(stream))) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform real in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t reject_from = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next();
      if (x >= reject_from) return x % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prm
