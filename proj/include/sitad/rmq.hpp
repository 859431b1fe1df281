#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sitad/detail/io.hpp"

namespace sitad {

struct RangeMax {
  std::uint64_t index = 0;  // 1-based position of the leftmost maximum
  std::uint32_t value = 0;

  friend bool operator==(const RangeMax&, const RangeMax&) = default;
};

// O(1) range-maximum queries over an immutable u32 array, 1-based inclusive
// ranges, ties resolved to the leftmost position.
//
// Short arrays get a plain sparse table. Longer ones switch to superblocks of
// 64 elements (per-superblock max and first position, sparse table over the
// superblock maxima, bounded head/tail scans), which keeps the table from
// growing as n log n on the long weight arrays this index rides on.
class RmqIndex {
 public:
  RmqIndex() = default;

  explicit RmqIndex(std::vector<std::uint32_t> values) : values_(std::move(values)) {
    if (values_.size() <= kSparseCutoff) {
      dense_table_ = build_table(values_.size(), [this](std::uint64_t i) { return values_[i]; });
    } else {
      const std::uint64_t sb_count = (values_.size() + kSuperblock - 1) / kSuperblock;
      sb_max_.resize(sb_count);
      sb_first_.resize(sb_count);
      for (std::uint64_t j = 0; j < sb_count; ++j) {
        const std::uint64_t begin = j * kSuperblock;
        const std::uint64_t end = std::min<std::uint64_t>(begin + kSuperblock, values_.size());
        std::uint64_t best = begin;
        for (std::uint64_t i = begin + 1; i < end; ++i) {
          if (values_[i] > values_[best]) best = i;
        }
        sb_max_[j] = values_[best];
        sb_first_[j] = best;
      }
      sb_table_ = build_table(sb_count, [this](std::uint64_t j) { return sb_max_[j]; });
    }
  }

  std::size_t size() const { return values_.size(); }

  std::uint32_t value_at(std::uint64_t i) const {
    check_range(i, i);
    return values_[i - 1];
  }

  RangeMax range_max(std::uint64_t s, std::uint64_t t) const {
    check_range(s, t);
    const std::uint64_t l = s - 1;
    const std::uint64_t r = t - 1;
    std::uint64_t best;
    if (values_.size() <= kSparseCutoff) {
      best = table_query(dense_table_, [this](std::uint64_t i) { return values_[i]; }, l, r);
    } else {
      const std::uint64_t jb = l / kSuperblock;
      const std::uint64_t je = r / kSuperblock;
      if (jb == je) {
        best = scan_first_max(l, r);
      } else {
        best = scan_first_max(l, (jb + 1) * kSuperblock - 1);
        if (je - jb >= 2) {
          const std::uint64_t j = table_query(sb_table_, [this](std::uint64_t k) { return sb_max_[k]; }, jb + 1, je - 1);
          const std::uint64_t mid = sb_first_[j];
          if (values_[mid] > values_[best]) best = mid;
        }
        const std::uint64_t tail = scan_first_max(je * kSuperblock, r);
        if (values_[tail] > values_[best]) best = tail;
      }
    }
    return {best + 1, values_[best]};
  }

  void save(detail::Writer& w) const {
    w.u64(values_.size());
    w.u32_array(values_);
  }

  static RmqIndex load(detail::Reader& r) {
    const std::uint64_t n = r.u64();
    return RmqIndex(r.u32_vector(n));
  }

 private:
  static constexpr std::uint64_t kSparseCutoff = 256;
  static constexpr std::uint64_t kSuperblock = 64;

  // table[k][i] = position of the leftmost maximum in [i, i + 2^k - 1].
  using Table = std::vector<std::vector<std::uint64_t>>;

  template <class ValueAt>
  static Table build_table(std::uint64_t n, ValueAt value_at) {
    Table table;
    if (n == 0) return table;
    table.emplace_back(n);
    for (std::uint64_t i = 0; i < n; ++i) table[0][i] = i;
    for (std::uint64_t half = 1; half * 2 <= n; half *= 2) {
      const auto& prev = table.back();
      std::vector<std::uint64_t> next(n - half * 2 + 1);
      for (std::uint64_t i = 0; i < next.size(); ++i) {
        const std::uint64_t a = prev[i];
        const std::uint64_t b = prev[i + half];
        next[i] = value_at(a) >= value_at(b) ? a : b;
      }
      table.push_back(std::move(next));
    }
    return table;
  }

  template <class ValueAt>
  static std::uint64_t table_query(const Table& table, ValueAt value_at, std::uint64_t l, std::uint64_t r) {
    const auto k = static_cast<std::uint64_t>(std::bit_width(r - l + 1) - 1);
    const std::uint64_t a = table[k][l];
    const std::uint64_t b = table[k][r - (std::uint64_t{1} << k) + 1];
    return value_at(a) >= value_at(b) ? a : b;
  }

  std::uint64_t scan_first_max(std::uint64_t l, std::uint64_t r) const {
    std::uint64_t best = l;
    for (std::uint64_t i = l + 1; i <= r; ++i) {
      if (values_[i] > values_[best]) best = i;
    }
    return best;
  }

  void check_range(std::uint64_t s, std::uint64_t t) const {
    if (s == 0 || s > t) throw std::invalid_argument("invalid range");
    if (t > values_.size()) throw std::out_of_range("range end beyond array length");
  }

  std::vector<std::uint32_t> values_;
  Table dense_table_;
  std::vector<std::uint32_t> sb_max_;
  std::vector<std::uint64_t> sb_first_;
  Table sb_table_;
};

}  // namespace sitad
