#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sitad/blocks.hpp"
#include "sitad/descriptor.hpp"
#include "sitad/stats.hpp"

namespace sitad {

// Sparse elementwise maximum: every dimension carries the larger of the two
// weights (absent means 0).
inline Descriptor elementwise_max(const Descriptor& a, const Descriptor& b) {
  std::vector<Entry> merged;
  auto as = a.entries();
  auto bs = b.entries();
  std::size_t i = 0, j = 0;
  while (i < as.size() || j < bs.size()) {
    if (j == bs.size() || (i < as.size() && as[i].dim < bs[j].dim)) {
      merged.push_back(as[i++]);
    } else if (i == as.size() || bs[j].dim < as[i].dim) {
      merged.push_back(bs[j++]);
    } else {
      merged.push_back({as[i].dim, std::max(as[i].weight, bs[j].weight)});
      ++i;
      ++j;
    }
  }
  return Descriptor::from_entries(std::move(merged));
}

using DescriptorStore = std::unordered_map<DescriptorId, const Descriptor*>;

// Intervals-splitting tree over one block with an explicit summary
// descriptor per node. Memory-heavy by design; this is the plain-structure
// oracle the succinct index is checked against.
class ReferenceTree {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct Node {
    std::uint64_t s = 0;  // 1-based inclusive interval over block positions
    std::uint64_t e = 0;
    std::size_t left = npos;
    std::size_t right = npos;
    Descriptor summary;

    bool leaf() const { return s == e; }
  };

  static ReferenceTree build(const Block& block, const DescriptorStore& store) {
    if (block.ids.empty()) throw std::invalid_argument("cannot build a tree over an empty block");
    ReferenceTree tree;
    tree.norm_ = block.norm;
    tree.ids_ = block.ids;
    tree.root_ = tree.build_node(1, block.ids.size(), store);
    return tree;
  }

  std::uint64_t norm() const { return norm_; }
  const std::vector<DescriptorId>& ids() const { return ids_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }

  // Depth-first threshold search. Every visited node counts toward
  // traversed_nodes, including nodes whose bound fails.
  std::vector<SearchHit> search(const Descriptor& q, const Threshold& eps, QueryStats* stats = nullptr) const {
    const std::uint64_t norm_q = squared_norm(q);
    const auto k = DotThreshold::block_threshold(norm_, norm_q, eps);
    std::vector<SearchHit> hits;
    QueryStats local;
    visit(root_, q, norm_q, k, hits, local);
    if (stats) {
      local.selected_blocks = 1;
      *stats += local;
    }
    return hits;
  }

  // Calls fn(s, e, bound) for every node with its query-specific bound.
  template <class Fn>
  void for_each_bound(const Descriptor& q, Fn&& fn) const {
    for (const auto& node : nodes_) {
      fn(node.s, node.e, dot(node.summary, q));
    }
  }

 private:
  std::size_t build_node(std::uint64_t s, std::uint64_t e, const DescriptorStore& store) {
    if (s == e) {
      const auto it = store.find(ids_[s - 1]);
      if (it == store.end()) throw std::invalid_argument("block id missing from descriptor store");
      nodes_.push_back({s, e, npos, npos, *it->second});
      return nodes_.size() - 1;
    }
    const std::uint64_t mid = (s + e) / 2;
    const std::size_t left = build_node(s, mid, store);
    const std::size_t right = build_node(mid + 1, e, store);
    Node node{s, e, left, right, elementwise_max(nodes_[left].summary, nodes_[right].summary)};
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  void visit(std::size_t idx, const Descriptor& q, std::uint64_t norm_q, const DotThreshold& k,
             std::vector<SearchHit>& hits, QueryStats& stats) const {
    const Node& node = nodes_[idx];
    ++stats.traversed_nodes;
    const std::uint64_t bound = dot(node.summary, q);
    if (!k.met_by(bound)) return;
    if (node.leaf()) {
      hits.push_back({ids_[node.s - 1], similarity_from_parts(bound, norm_, norm_q)});
      ++stats.results;
      return;
    }
    visit(node.left, q, norm_q, k, hits, stats);
    visit(node.right, q, norm_q, k, hits, stats);
  }

  std::uint64_t norm_ = 0;
  std::vector<DescriptorId> ids_;
  std::vector<Node> nodes_;
  std::size_t root_ = npos;
};

}  // namespace sitad
