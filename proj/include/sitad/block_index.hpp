#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sitad/bit_vector.hpp"
#include "sitad/blocks.hpp"
#include "sitad/descriptor.hpp"
#include "sitad/detail/io.hpp"
#include "sitad/rmq.hpp"
#include "sitad/stats.hpp"
#include "sitad/summary_tree.hpp"

namespace sitad {

inline std::size_t ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1));
}

// Child spans of a node-local dimension interval under one routing bitvector:
// s_left = rank0(s-1)+1, t_left = rank0(t), s_right = rank1(s-1)+1,
// t_right = rank1(t). An empty child span comes out with s > t.
struct ChildSpans {
  std::uint64_t s_left, t_left, s_right, t_right;

  friend bool operator==(const ChildSpans&, const ChildSpans&) = default;
};

inline ChildSpans descend(const RankBitVector& bv, std::uint64_t s, std::uint64_t t) {
  const std::uint64_t r1s = bv.rank1(s - 1);
  const std::uint64_t r1t = bv.rank1(t);
  return {(s - 1) - r1s + 1, t - r1t, r1s + 1, r1t};
}

// Succinct index over one equal-norm block.
//
// The root arrays concatenate, per ascending dimension d, the block positions
// holding d (transient) and their weights E_0 (kept). Sparse offsets P give
// each dimension's root span. Elements are then routed down the
// intervals-splitting tree: at depth l, bit k of the level bitvector is 1 iff
// the element's block position falls in the right half of its node's
// interval. Every element appears at every level; a node whose interval is
// already a singleton passes its elements through with 0 bits. That keeps
// each level at exactly N^c bits and makes child offsets rank-computable:
// a node's span [off+1, off+m] at level l maps to a left child at the same
// offset and a right child at off + zeros(span) at level l+1, with no
// per-node directory. A weight array in level order (with a range-max index)
// exists per depth, so the Eq-style bound max E[s..t] * f is one RMQ per
// live query term at any node. At a leaf the spans are single weights, the
// bound degenerates to the exact dot product, and similarity follows from
// (dot, c, ||q||^2) without stored descriptors.
class BlockIndex {
 public:
  using NodeVisitor = std::function<void(std::uint64_t a, std::uint64_t b, uint128 bound)>;

  static BlockIndex build(const Block& block, const DescriptorStore& store) {
    if (block.ids.empty()) throw std::invalid_argument("cannot index an empty block");
    BlockIndex idx;
    idx.norm_ = block.norm;
    idx.ids_ = block.ids;
    const std::uint64_t n = idx.ids_.size();

    // Root arrays grouped by ascending dimension, ascending position within.
    std::unordered_map<std::uint64_t, std::vector<std::pair<std::uint64_t, std::uint32_t>>> by_dim;
    for (std::uint64_t p = 1; p <= n; ++p) {
      const auto it = store.find(idx.ids_[p - 1]);
      if (it == store.end()) throw std::invalid_argument("block id missing from descriptor store");
      if (it->second->empty()) throw std::invalid_argument("cannot index an empty descriptor");
      for (const auto& e : it->second->entries()) {
        by_dim[e.dim].push_back({p, static_cast<std::uint32_t>(e.weight)});
      }
    }
    std::vector<std::uint64_t> dims;
    dims.reserve(by_dim.size());
    for (const auto& [d, _] : by_dim) dims.push_back(d);
    std::sort(dims.begin(), dims.end());

    std::vector<std::uint64_t> positions;
    std::vector<std::uint32_t> weights;
    for (const auto d : dims) {
      const auto& group = by_dim[d];
      for (const auto& [p, w] : group) {
        positions.push_back(p);
        weights.push_back(w);
      }
      idx.p_dims_.push_back(d);
      idx.p_ends_.push_back(positions.size());
    }
    idx.element_count_ = positions.size();

    // Route level by level; weights in level order feed one RMQ per depth.
    struct Span {
      std::uint64_t a, b;       // block position interval
      std::size_t begin, end;   // element range in the level arrays
    };
    std::vector<Span> spans = {{1, n, 0, positions.size()}};
    const std::size_t depth = ceil_log2(n);
    for (std::size_t lvl = 0; lvl < depth; ++lvl) {
      idx.level_weights_.emplace_back(std::vector<std::uint32_t>(weights));
      BitBuffer bits;
      std::vector<std::uint64_t> next_pos(positions.size());
      std::vector<std::uint32_t> next_w(weights.size());
      std::vector<Span> next_spans;
      std::size_t out = 0;
      for (const auto& span : spans) {
        if (span.a == span.b) {
          const std::size_t begin = out;
          for (std::size_t k = span.begin; k < span.end; ++k) {
            bits.push_back(false);
            next_pos[out] = positions[k];
            next_w[out] = weights[k];
            ++out;
          }
          next_spans.push_back({span.a, span.b, begin, out});
          continue;
        }
        const std::uint64_t mid = (span.a + span.b) / 2;
        const std::size_t left_begin = out;
        for (std::size_t k = span.begin; k < span.end; ++k) {
          bits.push_back(positions[k] > mid);
          if (positions[k] <= mid) {
            next_pos[out] = positions[k];
            next_w[out] = weights[k];
            ++out;
          }
        }
        const std::size_t right_begin = out;
        for (std::size_t k = span.begin; k < span.end; ++k) {
          if (positions[k] > mid) {
            next_pos[out] = positions[k];
            next_w[out] = weights[k];
            ++out;
          }
        }
        next_spans.push_back({span.a, mid, left_begin, right_begin});
        next_spans.push_back({mid + 1, span.b, right_begin, out});
      }
      const std::uint64_t bit_count = bits.size();
      idx.level_bits_.emplace_back(std::move(bits).take_words(), bit_count);
      positions = std::move(next_pos);
      weights = std::move(next_w);
      spans = std::move(next_spans);
    }
    idx.level_weights_.emplace_back(std::move(weights));
    return idx;
  }

  std::uint64_t norm() const { return norm_; }
  const std::vector<DescriptorId>& ids() const { return ids_; }
  std::uint64_t element_count() const { return element_count_; }
  std::size_t level_count() const { return level_bits_.size(); }

  const RankBitVector& level_bits(std::size_t lvl) const { return level_bits_.at(lvl); }
  const RmqIndex& level_weights(std::size_t lvl) const { return level_weights_.at(lvl); }

  std::uint64_t max_dim() const { return p_dims_.back(); }
  std::uint32_t max_weight() const { return level_weights_[0].range_max(1, element_count_).value; }

  // Serialized footprint split by component; mirrors save()'s layout exactly.
  struct ComponentBytes {
    std::uint64_t header = 0;   // norm and level count
    std::uint64_t ids = 0;      // descriptor-id map
    std::uint64_t offsets = 0;  // root dimension spans
    std::uint64_t bits = 0;     // routing bitvectors
    std::uint64_t weights = 0;  // per-level weight arrays

    std::uint64_t total() const { return header + ids + offsets + bits + weights; }

    ComponentBytes& operator+=(const ComponentBytes& o) {
      header += o.header;
      ids += o.ids;
      offsets += o.offsets;
      bits += o.bits;
      weights += o.weights;
      return *this;
    }
  };

  ComponentBytes component_bytes() const {
    ComponentBytes c;
    c.header = 8 + 4;
    c.ids = 8 + 8 * ids_.size();
    c.offsets = 8 + 16 * p_dims_.size();
    for (const auto& bv : level_bits_) c.bits += 8 + 8 * bv.words().size();
    for (const auto& rmq : level_weights_) c.weights += 8 + 4 * rmq.size();
    return c;
  }

  // Root span of dimension d, or absent if no block member holds d.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> root_interval(std::uint64_t d) const {
    const auto it = std::lower_bound(p_dims_.begin(), p_dims_.end(), d);
    if (it == p_dims_.end() || *it != d) return std::nullopt;
    const std::size_t i = static_cast<std::size_t>(it - p_dims_.begin());
    return std::make_pair(i == 0 ? 1 : p_ends_[i - 1] + 1, p_ends_[i]);
  }

  std::vector<SearchHit> search(const Descriptor& q, const Threshold& eps, QueryStats* stats = nullptr,
                                const NodeVisitor& visitor = {}) const {
    const std::uint64_t norm_q = squared_norm(q);
    const auto k = DotThreshold::block_threshold(norm_, norm_q, eps);
    std::vector<Term> terms;
    auto entries = q.entries();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      if (const auto span = root_interval(entries[j].dim)) {
        terms.push_back({entries[j].weight, span->first, span->second});
      }
    }
    std::vector<SearchHit> hits;
    QueryStats local;
    visit(0, 1, ids_.size(), 0, element_count_, terms, norm_q, k, visitor, hits, local);
    if (stats) {
      local.selected_blocks = 1;
      *stats += local;
    }
    return hits;
  }

  void save(detail::Writer& w) const {
    w.u64(norm_);
    w.u64(ids_.size());
    w.u64_array(ids_);
    w.u64(p_dims_.size());
    w.u64_array(p_dims_);
    w.u64_array(p_ends_);
    w.u32(static_cast<std::uint32_t>(level_bits_.size()));
    for (const auto& bv : level_bits_) bv.save(w);
    for (const auto& rmq : level_weights_) rmq.save(w);
  }

  static BlockIndex load(detail::Reader& r) {
    BlockIndex idx;
    idx.norm_ = r.u64();
    const std::uint64_t n = r.u64();
    if (n == 0) throw detail::IoError("block section with no ids");
    idx.ids_ = r.u64_vector(n);
    const std::uint64_t dim_count = r.u64();
    idx.p_dims_ = r.u64_vector(dim_count);
    idx.p_ends_ = r.u64_vector(dim_count);
    if (dim_count == 0 || !std::is_sorted(idx.p_dims_.begin(), idx.p_dims_.end()) ||
        !std::is_sorted(idx.p_ends_.begin(), idx.p_ends_.end())) {
      throw detail::IoError("malformed block offsets");
    }
    idx.element_count_ = idx.p_ends_.back();
    const std::uint32_t levels = r.u32();
    if (levels != ceil_log2(n)) throw detail::IoError("level count does not match block size");
    for (std::uint32_t l = 0; l < levels; ++l) {
      idx.level_bits_.push_back(RankBitVector::load(r));
      if (idx.level_bits_.back().size() != idx.element_count_) {
        throw detail::IoError("level bit length does not match element count");
      }
    }
    for (std::uint32_t l = 0; l < levels + 1; ++l) {
      idx.level_weights_.push_back(RmqIndex::load(r));
      if (idx.level_weights_.back().size() != idx.element_count_) {
        throw detail::IoError("level weight length does not match element count");
      }
    }
    return idx;
  }

 private:
  struct Term {
    std::uint64_t weight;
    std::uint64_t s, t;  // node-local span, live iff s <= t
  };

  void visit(std::size_t lvl, std::uint64_t a, std::uint64_t b, std::uint64_t off, std::uint64_t m,
             const std::vector<Term>& terms, std::uint64_t norm_q, const DotThreshold& k,
             const NodeVisitor& visitor, std::vector<SearchHit>& hits, QueryStats& stats) const {
    ++stats.traversed_nodes;
    uint128 bound = 0;
    const auto& weights = level_weights_[lvl];
    for (const auto& term : terms) {
      bound += static_cast<uint128>(weights.range_max(off + term.s, off + term.t).value) * term.weight;
    }
    if (visitor) visitor(a, b, bound);
    if (!k.met_by(bound)) return;
    if (a == b) {
      const auto dot_xq = detail::checked_u64(bound, "dot product exceeds 64 bits");
      hits.push_back({ids_[a - 1], similarity_from_parts(dot_xq, norm_, norm_q)});
      ++stats.results;
      return;
    }

    const auto& bv = level_bits_[lvl];
    const std::uint64_t ones_before_span = bv.rank1(off);
    const std::uint64_t zeros = m - (bv.rank1(off + m) - ones_before_span);
    stats.rank_ops += 2;
    std::vector<Term> left_terms, right_terms;
    left_terms.reserve(terms.size());
    right_terms.reserve(terms.size());
    for (const auto& term : terms) {
      const std::uint64_t ones_to_s = bv.rank1(off + term.s - 1) - ones_before_span;
      const std::uint64_t ones_to_t = bv.rank1(off + term.t) - ones_before_span;
      stats.rank_ops += 2;
      const std::uint64_t zeros_to_s = (term.s - 1) - ones_to_s;
      const std::uint64_t zeros_to_t = term.t - ones_to_t;
      if (zeros_to_s + 1 <= zeros_to_t) left_terms.push_back({term.weight, zeros_to_s + 1, zeros_to_t});
      if (ones_to_s + 1 <= ones_to_t) right_terms.push_back({term.weight, ones_to_s + 1, ones_to_t});
    }
    const std::uint64_t mid = (a + b) / 2;
    visit(lvl + 1, a, mid, off, zeros, left_terms, norm_q, k, visitor, hits, stats);
    visit(lvl + 1, mid + 1, b, off + zeros, m - zeros, right_terms, norm_q, k, visitor, hits, stats);
  }

  std::uint64_t norm_ = 0;
  std::vector<DescriptorId> ids_;
  std::vector<std::uint64_t> p_dims_;
  std::vector<std::uint64_t> p_ends_;
  std::uint64_t element_count_ = 0;
  std::vector<RankBitVector> level_bits_;
  std::vector<RmqIndex> level_weights_;
};

}  // namespace sitad
