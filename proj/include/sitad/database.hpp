#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sitad/descriptor.hpp"
#include "sitad/detail/io.hpp"

namespace sitad {

// Ingest-time bounds. Together they keep squared norms and dot products
// representable: |W| * M^2 <= 2^64, with the 128-bit accumulators in
// descriptor.hpp as the backstop for the boundary case.
inline constexpr std::uint64_t kMaxIngestWeight = std::uint64_t{1} << 16;
inline constexpr std::uint64_t kMaxIngestEntries = std::uint64_t{1} << 32;

// In-memory descriptor collection with unique record ids, in file order.
class Database {
 public:
  void add(DescriptorRecord rec) {
    if (!ids_.insert(rec.id).second) {
      throw ParseError("duplicate record id " + std::to_string(rec.id));
    }
    if (rec.desc.size() > kMaxIngestEntries) {
      throw ParseError("record " + std::to_string(rec.id) + " has more than 2^32 entries");
    }
    for (const auto& e : rec.desc.entries()) {
      if (e.weight > kMaxIngestWeight) {
        throw ParseError("record " + std::to_string(rec.id) + " has weight " + std::to_string(e.weight) +
                         " above the ingest bound 2^16");
      }
    }
    max_dim_ = std::max(max_dim_, rec.desc.max_dim());
    max_weight_ = std::max(max_weight_, rec.desc.max_weight());
    total_entries_ += rec.desc.size();
    records_.push_back(std::move(rec));
  }

  static Database load_text(std::istream& in) {
    Database db;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      try {
        db.add(parse_descriptor(line));
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return db;
  }

  static Database load_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw detail::IoError("cannot open " + path);
    return load_text(in);
  }

  void write_text(std::ostream& out) const {
    for (const auto& rec : records_) {
      out << format_record(rec) << '\n';
    }
    if (!out) throw detail::IoError("write failed");
  }

  void write_text_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw detail::IoError("cannot open " + path + " for writing");
    write_text(out);
  }

  const std::vector<DescriptorRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::uint64_t max_dim() const { return max_dim_; }
  std::uint64_t max_weight() const { return max_weight_; }
  std::uint64_t total_entries() const { return total_entries_; }

 private:
  std::vector<DescriptorRecord> records_;
  std::unordered_set<DescriptorId> ids_;
  std::uint64_t max_dim_ = 0;
  std::uint64_t max_weight_ = 0;
  std::uint64_t total_entries_ = 0;
};

}  // namespace sitad
