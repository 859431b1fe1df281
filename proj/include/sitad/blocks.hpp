#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sitad/descriptor.hpp"

namespace sitad {

namespace detail {

// 256-bit product of two u128 factors, for comparisons whose cross
// multiplication outgrows 128 bits.
struct U256 {
  uint128 hi = 0;
  uint128 lo = 0;

  static U256 mul(uint128 a, uint128 b) {
    const uint128 mask = ~std::uint64_t{0};
    const uint128 a0 = a & mask, a1 = a >> 64;
    const uint128 b0 = b & mask, b1 = b >> 64;
    const uint128 p00 = a0 * b0;
    const uint128 p01 = a0 * b1;
    const uint128 p10 = a1 * b0;
    const uint128 p11 = a1 * b1;
    uint128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
    U256 r;
    r.lo = (mid << 64) | (p00 & mask);
    r.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    return r;
  }

  friend bool operator<=(const U256& a, const U256& b) {
    return a.hi != b.hi ? a.hi < b.hi : a.lo <= b.lo;
  }
};

}  // namespace detail

// All database descriptors sharing one squared norm, ids ascending.
struct Block {
  std::uint64_t norm = 0;
  std::vector<DescriptorId> ids;

  friend bool operator==(const Block&, const Block&) = default;
};

// Minimum dot product a block member must reach, kept as the exact rational
// num*(c + ||q||^2) / (num + den) and compared by cross-multiplication.
struct DotThreshold {
  uint128 scaled_num = 0;
  std::uint64_t scale = 1;

  static DotThreshold block_threshold(std::uint64_t c, std::uint64_t norm_q, const Threshold& eps) {
    return {static_cast<uint128>(eps.num()) * (static_cast<uint128>(c) + norm_q), eps.num() + eps.den()};
  }

  bool met_by(uint128 bound) const {
    if (bound > ~uint128{0} / scale) return true;  // product would exceed 128 bits; scaled_num never does
    return bound * scale >= scaled_num;
  }
};

// True iff the block threshold num/(num+den)*(c + ||q||^2) is attainable at
// all for squared norm c, i.e. does not exceed the Cauchy-Schwarz cap
// sqrt(c*||q||^2) on any dot product against q. Squared to stay integral:
// num^2*(c+nq)^2 <= (num+den)^2*c*nq. Any x with J(x,q) >= eps satisfies
// this at c = ||x||^2, so filtering blocks by it never drops a true match.
inline bool norm_compatible(std::uint64_t c, std::uint64_t norm_q, const Threshold& eps) {
  const uint128 p = static_cast<uint128>(eps.num()) * (static_cast<uint128>(c) + norm_q);
  const std::uint64_t s = eps.num() + eps.den();
  const auto lhs = detail::U256::mul(p, p);
  const auto rhs = detail::U256::mul(static_cast<uint128>(s) * s, static_cast<uint128>(c) * norm_q);
  return lhs <= rhs;
}

// Closed interval [c_lo, c_hi] of norm_compatible values. The compatible set
// is contiguous (upward parabola in c) and always contains c = ||q||^2.
inline std::pair<std::uint64_t, std::uint64_t> norm_interval(std::uint64_t norm_q, const Threshold& eps) {
  if (norm_q == 0) throw std::domain_error("norm interval undefined for an empty query");
  std::uint64_t lo = 1, hi = norm_q;
  while (lo < hi) {  // first compatible c; predicate monotone on [1, norm_q]
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (norm_compatible(mid, norm_q, eps)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::uint64_t c_lo = lo;
  lo = norm_q;
  hi = std::numeric_limits<std::uint64_t>::max();
  while (lo < hi) {  // last compatible c; predicate monotone on [norm_q, max]
    const std::uint64_t mid = lo + (hi - lo) / 2 + (hi - lo) % 2;
    if (norm_compatible(mid, norm_q, eps)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return {c_lo, lo};
}

// Database partition keyed by squared norm, ascending.
class BlockSet {
 public:
  // Groups records by squared norm. Every descriptor must be nonempty; the
  // caller filters empties beforehand.
  static BlockSet partition(const std::vector<DescriptorRecord>& records) {
    std::map<std::uint64_t, Block> by_norm;
    for (const auto& rec : records) {
      if (rec.desc.empty()) throw std::invalid_argument("cannot partition an empty descriptor");
      const std::uint64_t c = squared_norm(rec.desc);
      auto& block = by_norm[c];
      block.norm = c;
      block.ids.push_back(rec.id);
    }
    BlockSet set;
    set.blocks_.reserve(by_norm.size());
    for (auto& [c, block] : by_norm) {
      std::sort(block.ids.begin(), block.ids.end());
      set.blocks_.push_back(std::move(block));
    }
    return set;
  }

  const std::vector<Block>& blocks() const { return blocks_; }

  const Block* find(std::uint64_t norm) const {
    const auto it = std::lower_bound(blocks_.begin(), blocks_.end(), norm,
                                     [](const Block& b, std::uint64_t c) { return b.norm < c; });
    return (it != blocks_.end() && it->norm == norm) ? &*it : nullptr;
  }

  std::size_t total_ids() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.ids.size();
    return n;
  }

  // Norms c present in the set whose block threshold is attainable for q,
  // ascending. Any x with J(x,q) >= eps has its squared norm included.
  std::vector<std::uint64_t> candidate_norms(std::uint64_t norm_q, const Threshold& eps) const {
    const auto [c_lo, c_hi] = norm_interval(norm_q, eps);
    std::vector<std::uint64_t> out;
    auto it = std::lower_bound(blocks_.begin(), blocks_.end(), c_lo,
                               [](const Block& b, std::uint64_t c) { return b.norm < c; });
    for (; it != blocks_.end() && it->norm <= c_hi; ++it) {
      out.push_back(it->norm);
    }
    return out;
  }

  std::vector<std::uint64_t> candidate_norms(const Descriptor& q, const Threshold& eps) const {
    return candidate_norms(squared_norm(q), eps);
  }

 private:
  std::vector<Block> blocks_;
};

}  // namespace sitad
