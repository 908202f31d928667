#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace pcgeom {

// splitmix64 step; also used to derive stream keys from (seed, id, ...) tuples.
std::uint64_t splitmix64(std::uint64_t& state);

// Mix two 64-bit values into one key. Not cryptographic, just well spread.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

/**
 * xoshiro256** generator with explicit distribution derivations so that a
 * given seed produces the same stream on every platform. The standard
 * library distributions are implementation-defined and would break
 * byte-identical reproducibility of generated clouds and trained weights.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in [a, b).
  double uniform(double a, double b);
  // Standard normal via Box-Muller; generates pairs, caches the second.
  double normal();
  // Uniform integer in [lo, hi] inclusive, rejection sampled (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // First k elements of a Fisher-Yates pass over [0, n): a uniform sample
  // without replacement, in sampled order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace pcgeom
