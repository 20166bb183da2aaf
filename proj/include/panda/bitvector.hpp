#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panda/error.hpp"

namespace panda {

/// Fixed-length packed bit string. Bit i lives in word i/64 at position i%64.
/// Bits past size() in the last word are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size, bool fill = false)
      : size_(size), words_((size + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
    trim();
  }

  static BitVector ones(std::size_t size) { return BitVector(size, true); }

  static BitVector from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') {
        v.set(i, true);
      } else if (bits[i] != '0') {
        fail(Errc::parse, "bit string may only contain 0/1");
      }
    }
    return v;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  bool operator[](std::size_t i) const { return get(i); }

  void set(std::size_t i, bool value) {
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= bit;
    } else {
      words_[i >> 6] &= ~bit;
    }
  }

  std::span<std::uint64_t> words() noexcept { return words_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool all() const noexcept { return count() == size_; }
  bool none() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  bool any() const noexcept { return !none(); }

  BitVector slice(std::size_t pos, std::size_t len) const {
    BitVector out(len);
    for (std::size_t i = 0; i < len; ++i) out.set(i, get(pos + i));
    return out;
  }

  /// Overwrites bits [pos, pos + src.size()) with src.
  void assign(std::size_t pos, const BitVector& src) {
    for (std::size_t i = 0; i < src.size(); ++i) set(pos + i, src.get(i));
  }

  BitVector operator~() const {
    BitVector out(*this);
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }

  BitVector& operator&=(const BitVector& o) { return combine(o, [](auto a, auto b) { return a & b; }); }
  BitVector& operator|=(const BitVector& o) { return combine(o, [](auto a, auto b) { return a | b; }); }
  BitVector& operator^=(const BitVector& o) { return combine(o, [](auto a, auto b) { return a ^ b; }); }

  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
      if (get(i)) s[i] = '1';
    }
    return s;
  }

 private:
  template <typename Op>
  BitVector& combine(const BitVector& o, Op op) {
    if (o.size_ != size_) fail(Errc::shape, "bit vector length mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] = op(words_[i], o.words_[i]);
    trim();
    return *this;
  }

  void trim() noexcept {
    if (size_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace panda
