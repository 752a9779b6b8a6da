#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace benchpress {

/// Binary selection vector over a universe of `size()` sample positions, stored packed.
/// Bits past `size()` in the last word are always zero.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::size_t size);

  static Mask full(std::size_t size);
  static Mask from_indices(std::size_t size, std::span<const std::size_t> indices);
  /// Parses "1010"-style strings, leftmost character is position 0.
  static Mask from_string(std::string_view bits);

  std::size_t size() const { return size_; }
  std::size_t count() const;

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  /// Positions of set bits, ascending.
  std::vector<std::size_t> indices() const;
  /// Positions of clear bits, ascending.
  std::vector<std::size_t> clear_indices() const;

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }
  /// Zeroes the unused high bits of the last word.
  void trim();

  std::string to_string() const;

  bool operator==(const Mask&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

inline std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

}  // namespace benchpress
