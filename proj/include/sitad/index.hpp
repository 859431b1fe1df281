#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sitad/block_index.hpp"
#include "sitad/blocks.hpp"
#include "sitad/database.hpp"
#include "sitad/descriptor.hpp"
#include "sitad/detail/io.hpp"
#include "sitad/stats.hpp"

namespace sitad {

struct IndexSection {
  std::uint64_t norm;
  std::uint64_t id_count;
  std::uint64_t element_count;
  std::uint64_t offset;  // absolute byte offset of the block section
  std::uint64_t bytes;   // serialized section length

  friend bool operator==(const IndexSection&, const IndexSection&) = default;
};

struct IndexSaveReport {
  std::uint64_t total_bytes = 0;
  std::uint64_t header_bytes = 0;  // magic, version, counts, directory
  std::vector<IndexSection> sections;
};

// Searchable collection of per-norm block indexes with a binary container
// format: magic, version, global counts, a block directory, the block
// sections, and a CRC32 trailer over everything before it.
class Index {
 public:
  static constexpr char kMagic[4] = {'S', 'I', 'T', 'D'};
  static constexpr std::uint32_t kVersion = 1;

  // Builds from every record that has at least one entry; records with empty
  // descriptors cannot match any query and are reported via skipped_ids().
  static Index build(const Database& db) {
    Index idx;
    DescriptorStore store;
    store.reserve(db.size());
    std::map<std::uint64_t, Block> by_norm;
    for (const auto& rec : db.records()) {
      if (rec.desc.empty()) {
        idx.skipped_ids_.push_back(rec.id);
        continue;
      }
      store[rec.id] = &rec.desc;
      const std::uint64_t c = squared_norm(rec.desc);
      auto& block = by_norm[c];
      block.norm = c;
      block.ids.push_back(rec.id);
    }
    idx.blocks_.reserve(by_norm.size());
    for (auto& [c, block] : by_norm) {
      std::sort(block.ids.begin(), block.ids.end());
      idx.blocks_.push_back(BlockIndex::build(block, store));
      idx.norms_.push_back(c);
      idx.max_dim_ = std::max(idx.max_dim_, idx.blocks_.back().max_dim());
      idx.max_weight_ = std::max<std::uint64_t>(idx.max_weight_, idx.blocks_.back().max_weight());
      idx.record_count_ += block.ids.size();
    }
    return idx;
  }

  std::uint64_t record_count() const { return record_count_; }
  std::uint64_t max_dim() const { return max_dim_; }
  std::uint64_t max_weight() const { return max_weight_; }
  const std::vector<BlockIndex>& blocks() const { return blocks_; }
  const std::vector<DescriptorId>& skipped_ids() const { return skipped_ids_; }

  // Matches sorted by descending similarity, ascending id on ties. Only
  // blocks whose norm can reach the threshold against q are searched; that
  // count lands in stats->selected_blocks.
  std::vector<SearchHit> search(const Descriptor& q, const Threshold& eps, QueryStats* stats = nullptr) const {
    if (q.empty()) throw std::invalid_argument("cannot search with an empty descriptor");
    std::vector<SearchHit> hits;
    if (blocks_.empty()) return hits;
    const auto [c_lo, c_hi] = norm_interval(squared_norm(q), eps);
    const auto first = std::lower_bound(norms_.begin(), norms_.end(), c_lo);
    const auto last = std::upper_bound(first, norms_.end(), c_hi);
    for (auto it = first; it != last; ++it) {
      const auto& block = blocks_[static_cast<std::size_t>(it - norms_.begin())];
      auto block_hits = block.search(q, eps, stats);
      hits.insert(hits.end(), block_hits.begin(), block_hits.end());
    }
    sort_hits(hits);
    return hits;
  }

  IndexSaveReport save(detail::Writer& w) const {
    std::vector<std::string> payloads;
    payloads.reserve(blocks_.size());
    for (const auto& block : blocks_) {
      std::ostringstream os(std::ios::binary);
      detail::Writer bw(os);
      block.save(bw);
      payloads.push_back(std::move(os).str());
    }

    IndexSaveReport report;
    report.header_bytes = 4 + 4 + 4 * 8 + 32 * blocks_.size();

    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u64(max_dim_);
    w.u64(max_weight_);
    w.u64(record_count_);
    w.u64(blocks_.size());
    std::uint64_t offset = report.header_bytes;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      w.u64(blocks_[i].norm());
      w.u64(blocks_[i].ids().size());
      w.u64(blocks_[i].element_count());
      w.u64(offset);
      report.sections.push_back({blocks_[i].norm(), blocks_[i].ids().size(), blocks_[i].element_count(), offset,
                                 payloads[i].size()});
      offset += payloads[i].size();
    }
    for (const auto& payload : payloads) w.bytes(payload.data(), payload.size());
    const std::uint32_t checksum = w.crc();
    w.u32(checksum);
    report.total_bytes = w.bytes_written();
    return report;
  }

  static Index load(detail::Reader& r) {
    char magic[4];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw detail::IoError("not an index file");
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
      throw detail::IoError("unsupported index version " + std::to_string(version));
    }

    Index idx;
    idx.max_dim_ = r.u64();
    idx.max_weight_ = r.u64();
    idx.record_count_ = r.u64();
    const std::uint64_t block_count = r.u64();
    if (block_count > idx.record_count_) throw detail::IoError("more blocks than records");

    std::vector<IndexSection> directory;
    directory.reserve(block_count);
    for (std::uint64_t i = 0; i < block_count; ++i) {
      IndexSection s{};
      s.norm = r.u64();
      s.id_count = r.u64();
      s.element_count = r.u64();
      s.offset = r.u64();
      if (i > 0 && s.norm <= directory.back().norm) throw detail::IoError("block norms out of order");
      directory.push_back(s);
    }

    std::uint64_t total_ids = 0;
    for (const auto& s : directory) {
      if (r.bytes_read() != s.offset) throw detail::IoError("block section offset mismatch");
      auto block = BlockIndex::load(r);
      if (block.norm() != s.norm || block.ids().size() != s.id_count || block.element_count() != s.element_count) {
        throw detail::IoError("block section disagrees with directory");
      }
      total_ids += s.id_count;
      idx.norms_.push_back(block.norm());
      idx.blocks_.push_back(std::move(block));
    }
    if (total_ids != idx.record_count_) throw detail::IoError("record count disagrees with blocks");

    const std::uint32_t computed = r.crc();
    const std::uint32_t stored = r.u32();
    if (computed != stored) throw detail::IoError("index checksum mismatch");
    return idx;
  }

  IndexSaveReport save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw detail::IoError("cannot open " + path + " for writing");
    detail::Writer w(os);
    auto report = save(w);
    os.flush();
    if (!os) throw detail::IoError("failed writing " + path);
    return report;
  }

  static Index load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw detail::IoError("cannot open " + path);
    detail::Reader r(is);
    return load(r);
  }

  BlockIndex::ComponentBytes component_bytes() const {
    BlockIndex::ComponentBytes total;
    for (const auto& block : blocks_) total += block.component_bytes();
    return total;
  }

  // Size save() would produce, without serializing: header and directory,
  // block sections, checksum trailer.
  std::uint64_t serialized_bytes() const {
    return 4 + 4 + 4 * 8 + 32 * blocks_.size() + component_bytes().total() + 4;
  }

 private:
  std::vector<BlockIndex> blocks_;
  std::vector<std::uint64_t> norms_;
  std::vector<DescriptorId> skipped_ids_;
  std::uint64_t max_dim_ = 0;
  std::uint64_t max_weight_ = 0;
  std::uint64_t record_count_ = 0;
};

}  // namespace sitad
