#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace benchpress {

/// Seedable, splittable pseudo-random generator (xoshiro256** state, splitmix64 keying).
///
/// Every generator carries a 64-bit key. `derive(tags...)` returns a fresh generator whose
/// key depends only on the parent key and the tags, never on how many numbers the parent has
/// produced. The GA uses this to give each (generation, slot) its own stream, so the order in
/// which work is scheduled cannot change results.
///
/// Bounded integers and normals are computed here rather than through <random> distributions,
/// whose outputs are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  Rng derive(std::initializer_list<std::uint64_t> tags) const;
  Rng derive(std::uint64_t tag) const { return derive({tag}); }

  std::uint64_t key() const { return key_; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform double in (0, 1].
  double uniform_open_zero();
  bool bernoulli(double p);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& x);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace benchpress
