#pragma once

// Portable pseudo-random source. All randomness in ringopt flows through
// Xoshiro256StarStar and the helpers below, so a (seed, inputs) pair yields
// the same output on every platform and compiler. The standard library
// distributions are deliberately not used: their algorithms are
// implementation-defined.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>

namespace ringopt {

/// 64-bit seed. A value type so that seeds cannot be confused with counts.
struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

/// SplitMix64 step; used for seeding and for hashing seed tuples.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes `base` with each salt in order. Distinct salt tuples give
/// statistically independent child seeds.
Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> salts);

/// xoshiro256** 1.0 (Blackman & Vigna), state expanded from the seed with
/// SplitMix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256StarStar(Seed seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

 private:
  std::uint64_t s_[4];
};

using Rng = Xoshiro256StarStar;

/// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Standard normal variate (Box-Muller, one output per two uniforms).
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace ringopt
