#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sitad/descriptor.hpp"

namespace sitad {

// Per-query work counters, accumulated across all blocks a query touches.
struct QueryStats {
  std::uint64_t selected_blocks = 0;
  std::uint64_t traversed_nodes = 0;
  std::uint64_t rank_ops = 0;
  std::uint64_t results = 0;

  QueryStats& operator+=(const QueryStats& o) {
    selected_blocks += o.selected_blocks;
    traversed_nodes += o.traversed_nodes;
    rank_ops += o.rank_ops;
    results += o.results;
    return *this;
  }

  friend bool operator==(const QueryStats&, const QueryStats&) = default;
};

struct SearchHit {
  DescriptorId id = 0;
  Rational similarity;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Descending similarity, ascending id on ties, compared exactly.
inline void sort_hits(std::vector<SearchHit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (rational_less(b.similarity, a.similarity)) return true;
    if (rational_less(a.similarity, b.similarity)) return false;
    return a.id < b.id;
  });
}

}  // namespace sitad
