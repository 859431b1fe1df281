#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sitad/database.hpp"
#include "sitad/descriptor.hpp"
#include "sitad/stats.hpp"

namespace sitad {

// Exhaustive scan: evaluates the exact threshold predicate against every
// record. Serves as the ground-truth oracle for the other engines.
inline std::vector<SearchHit> ova_search(const Database& db, const Descriptor& q, const Threshold& eps,
                                         QueryStats* stats = nullptr) {
  if (q.empty()) throw std::invalid_argument("cannot search with an empty descriptor");
  const std::uint64_t norm_q = squared_norm(q);
  std::vector<SearchHit> hits;
  for (const auto& rec : db.records()) {
    if (rec.desc.empty()) continue;
    const std::uint64_t nx = squared_norm(rec.desc);
    const std::uint64_t d = dot(rec.desc, q);
    if (jaccard_geq_parts(d, nx, norm_q, eps)) {
      hits.push_back({rec.id, similarity_from_parts(d, nx, norm_q)});
    }
  }
  sort_hits(hits);
  if (stats) stats->results += hits.size();
  return hits;
}

// Term-at-a-time inverted index: per-dimension posting lists plus stored
// squared norms. Accumulates dot products for every record sharing a query
// dimension, then applies the same exact predicate as the scan.
class InvertedIndex {
 public:
  using Posting = std::pair<DescriptorId, std::uint64_t>;  // id, weight

  static InvertedIndex build(const Database& db) {
    InvertedIndex inv;
    for (const auto& rec : db.records()) {
      if (rec.desc.empty()) continue;
      inv.norms_.emplace(rec.id, squared_norm(rec.desc));
      for (const auto& e : rec.desc.entries()) {
        inv.postings_[e.dim].push_back({rec.id, e.weight});
        ++inv.total_postings_;
      }
    }
    for (auto& [d, list] : inv.postings_) {
      std::sort(list.begin(), list.end());
    }
    return inv;
  }

  const std::vector<Posting>& postings(std::uint64_t d) const {
    static const std::vector<Posting> kEmpty;
    const auto it = postings_.find(d);
    return it == postings_.end() ? kEmpty : it->second;
  }

  std::uint64_t total_postings() const { return total_postings_; }
  std::size_t record_count() const { return norms_.size(); }

  // Approximate resident footprint: postings, norms, and hash overheads.
  std::uint64_t memory_bytes() const {
    std::uint64_t bytes = 0;
    for (const auto& [d, list] : postings_) bytes += 48 + list.size() * sizeof(Posting);
    bytes += norms_.size() * 32;
    return bytes;
  }

  std::vector<SearchHit> search(const Descriptor& q, const Threshold& eps, QueryStats* stats = nullptr) const {
    if (q.empty()) throw std::invalid_argument("cannot search with an empty descriptor");
    const std::uint64_t norm_q = squared_norm(q);
    // Partial dot products only grow toward the full dot, which fits u64
    // by the Cauchy-Schwarz cap sqrt(nx*nq), so plain u64 accumulation is safe.
    std::unordered_map<DescriptorId, std::uint64_t> acc;
    for (const auto& e : q.entries()) {
      const auto it = postings_.find(e.dim);
      if (it == postings_.end()) continue;
      for (const auto& [id, w] : it->second) acc[id] += w * e.weight;
    }
    std::vector<SearchHit> hits;
    for (const auto& [id, d] : acc) {
      const std::uint64_t nx = norms_.at(id);
      if (jaccard_geq_parts(d, nx, norm_q, eps)) {
        hits.push_back({id, similarity_from_parts(d, nx, norm_q)});
      }
    }
    sort_hits(hits);
    if (stats) stats->results += hits.size();
    return hits;
  }

 private:
  std::unordered_map<std::uint64_t, std::vector<Posting>> postings_;
  std::unordered_map<DescriptorId, std::uint64_t> norms_;
  std::uint64_t total_postings_ = 0;
};

}  // namespace sitad
