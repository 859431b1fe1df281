#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sitad/detail/io.hpp"

namespace sitad {

// Append-only bit sequence used while building; 64-bit packed, position 1 is
// the lowest bit of the first word.
class BitBuffer {
 public:
  void push_back(bool bit) {
    const std::size_t word = n_ / 64;
    if (word == words_.size()) words_.push_back(0);
    if (bit) words_[word] |= std::uint64_t{1} << (n_ % 64);
    ++n_;
  }

  std::uint64_t size() const { return n_; }
  std::vector<std::uint64_t> take_words() && { return std::move(words_); }

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t n_ = 0;
};

// Immutable bit array with O(1) rank over 1-based prefixes B[1..i].
//
// Two sample levels ride on top of the raw words: an absolute 64-bit count
// every 2^16 bits and a 16-bit count relative to that every 64 bits, so a
// rank is two lookups plus one masked popcount. Overhead is 16/64 + 64/2^16
// bits per bit, about 0.251.
class RankBitVector {
 public:
  RankBitVector() = default;

  RankBitVector(std::vector<std::uint64_t> words, std::uint64_t n) : words_(std::move(words)), n_(n) {
    if (words_.size() != (n_ + 63) / 64) throw std::invalid_argument("word count does not match bit length");
    if (n_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;  // canonical tail for byte-stable serialization
    }
    build_samples();
  }

  static RankBitVector from_bools(const std::vector<bool>& bits) {
    BitBuffer buf;
    for (bool b : bits) buf.push_back(b);
    const std::uint64_t n = buf.size();
    return RankBitVector(std::move(buf).take_words(), n);
  }

  std::uint64_t size() const { return n_; }

  bool get(std::uint64_t i) const {
    check_position(i);
    return (words_[(i - 1) / 64] >> ((i - 1) % 64)) & 1u;
  }

  // Number of 1 bits in B[1..i]; rank1(0) = 0.
  std::uint64_t rank1(std::uint64_t i) const {
    if (i == 0) return 0;
    check_position(i);
    const std::uint64_t w = (i - 1) / 64;
    const std::uint64_t within = i - w * 64;  // 1..64
    const std::uint64_t mask = within == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << within) - 1;
    return large_[w / kWordsPerLarge] + small_[w] + static_cast<std::uint64_t>(std::popcount(words_[w] & mask));
  }

  std::uint64_t rank0(std::uint64_t i) const { return i - rank1(i); }

  std::uint64_t one_count() const { return ones_; }

  // Sample storage in bits; the raw words are excluded.
  std::uint64_t aux_bits() const { return large_.size() * 64 + small_.size() * 16; }

  const std::vector<std::uint64_t>& words() const { return words_; }

  void save(detail::Writer& w) const {
    w.u64(n_);
    w.u64_array(words_);
  }

  static RankBitVector load(detail::Reader& r) {
    const std::uint64_t n = r.u64();
    auto words = r.u64_vector((n + 63) / 64);
    return RankBitVector(std::move(words), n);
  }

 private:
  static constexpr std::uint64_t kWordsPerLarge = (std::uint64_t{1} << 16) / 64;

  void check_position(std::uint64_t i) const {
    if (i == 0 || i > n_) throw std::out_of_range("bit position out of range");
  }

  void build_samples() {
    small_.assign(words_.size(), 0);
    large_.assign(words_.size() / kWordsPerLarge + 1, 0);
    std::uint64_t total = 0;
    std::uint64_t since_large = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (w % kWordsPerLarge == 0) {
        large_[w / kWordsPerLarge] = total;
        since_large = 0;
      }
      small_[w] = static_cast<std::uint16_t>(since_large);
      const auto ones = static_cast<std::uint64_t>(std::popcount(words_[w]));
      total += ones;
      since_large += ones;
    }
    ones_ = total;
  }

  std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> large_;
  std::vector<std::uint16_t> small_;
  std::uint64_t n_ = 0;
  std::uint64_t ones_ = 0;
};

}  // namespace sitad
