#include "benchpress/mask.hpp"

#include <bit>

#include "benchpress/errors.hpp"

namespace benchpress {

Mask::Mask(std::size_t size) : size_(size), words_(words_for(size), 0) {}

Mask Mask::full(std::size_t size) {
  Mask m(size);
  for (auto& w : m.words_) w = ~std::uint64_t{0};
  m.trim();
  return m;
}

Mask Mask::from_indices(std::size_t size, std::span<const std::size_t> indices) {
  Mask m(size);
  for (std::size_t i : indices) {
    if (i >= size) throw ValidationError("mask index " + std::to_string(i) + " outside universe of size " + std::to_string(size));
    m.set(i);
  }
  return m;
}

Mask Mask::from_string(std::string_view bits) {
  Mask m(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      m.set(i);
    } else if (bits[i] != '0') {
      throw ValidationError("mask string must contain only '0' and '1'");
    }
  }
  return m;
}

std::size_t Mask::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::size_t> Mask::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

std::vector<std::size_t> Mask::clear_indices() const {
  std::vector<std::size_t> out;
  out.reserve(size_ - count());
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = ~words_[w];
    if (w + 1 == words_.size() && (size_ & 63) != 0) bits &= (std::uint64_t{1} << (size_ & 63)) - 1;
    while (bits != 0) {
      out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

void Mask::trim() {
  if ((size_ & 63) != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ & 63)) - 1;
}

std::string Mask::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (test(i)) s[i] = '1';
  return s;
}

}  // namespace benchpress
