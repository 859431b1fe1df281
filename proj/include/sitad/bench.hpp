#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sitad/baselines.hpp"
#include "sitad/database.hpp"
#include "sitad/generator.hpp"
#include "sitad/index.hpp"

namespace sitad {

enum class Engine { kOva, kInv, kSitad };

inline const char* engine_name(Engine e) {
  switch (e) {
    case Engine::kOva:
      return "ova";
    case Engine::kInv:
      return "inv";
    case Engine::kSitad:
      return "sitad";
  }
  return "?";
}

inline std::optional<Engine> parse_engine(std::string_view name) {
  if (name == "ova") return Engine::kOva;
  if (name == "inv") return Engine::kInv;
  if (name == "sitad") return Engine::kSitad;
  return std::nullopt;
}

struct BenchRow {
  Engine engine{};
  std::string eps;
  std::size_t queries = 0;
  int reps = 0;
  double mean_ms = 0;
  double stddev_ms = 0;
  std::uint64_t index_bytes = 0;
  double mean_selected_blocks = 0;
  double mean_traversed_nodes = 0;
  double mean_rank_ops = 0;
  double mean_results = 0;
};

struct BenchReport {
  std::uint64_t database_size = 0;
  std::vector<BenchRow> rows;
};

// Deterministically samples query descriptors from the database's nonempty
// records (mirrors benchmarking against stored compounds).
inline std::vector<Descriptor> sample_queries(const Database& db, std::size_t count, std::uint64_t seed) {
  std::vector<const Descriptor*> pool;
  for (const auto& rec : db.records()) {
    if (!rec.desc.empty()) pool.push_back(&rec.desc);
  }
  if (pool.empty()) throw std::invalid_argument("database has no nonempty descriptors to sample");
  SplitMix64 rng(seed);
  std::vector<Descriptor> queries;
  queries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) queries.push_back(*pool[rng.below(pool.size())]);
  return queries;
}

namespace detail {

struct TimingstatsAccumulator {
  double sum = 0;
  double sum_sq = 0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0; }
  double stddev() const {
    if (n < 2) return 0;
    const double m = mean();
    const double var = (sum_sq - sum * m) / static_cast<double>(n - 1);
    return var > 0 ? std::sqrt(var) : 0;
  }
};

template <typename SearchFn>
inline BenchRow bench_engine(SearchFn&& search, Engine engine, const std::string& eps_text,
                             const std::vector<Descriptor>& queries, int reps, std::uint64_t index_bytes) {
  using clock = std::chrono::steady_clock;
  BenchRow row;
  row.engine = engine;
  row.eps = eps_text;
  row.queries = queries.size();
  row.reps = reps;
  row.index_bytes = index_bytes;

  // counters are deterministic, so collect them once
  QueryStats totals;
  for (const auto& q : queries) search(q, &totals);

  TimingstatsAccumulator timing;
  for (int rep = 0; rep < reps; ++rep) {
    for (const auto& q : queries) {
      const auto t0 = clock::now();
      search(q, nullptr);
      const auto t1 = clock::now();
      timing.add(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }

  const double nq = static_cast<double>(queries.size());
  row.mean_ms = timing.mean();
  row.stddev_ms = timing.stddev();
  row.mean_selected_blocks = static_cast<double>(totals.selected_blocks) / nq;
  row.mean_traversed_nodes = static_cast<double>(totals.traversed_nodes) / nq;
  row.mean_rank_ops = static_cast<double>(totals.rank_ops) / nq;
  row.mean_results = static_cast<double>(totals.results) / nq;
  return row;
}

}  // namespace detail

// In-memory footprint of the raw records an exhaustive scan walks.
inline std::uint64_t database_memory_bytes(const Database& db) {
  return db.total_entries() * sizeof(Entry) + db.size() * (sizeof(DescriptorRecord) + 16);
}

// Runs every engine x threshold combination over the same query set: one
// untimed warm-up pass (which also collects the counters), then `reps` timed
// passes feeding per-query wall times into mean/stddev.
inline BenchReport run_bench(const Database& db, const std::vector<Descriptor>& queries,
                             const std::vector<std::string>& eps_texts, const std::vector<Engine>& engines,
                             int reps) {
  if (queries.empty()) throw std::invalid_argument("no queries to benchmark");
  if (eps_texts.empty()) throw std::invalid_argument("no thresholds to benchmark");
  if (engines.empty()) throw std::invalid_argument("no engines to benchmark");
  if (reps < 1) throw std::invalid_argument("repetitions must be at least 1");

  std::vector<Threshold> epses;
  epses.reserve(eps_texts.size());
  for (const auto& text : eps_texts) epses.push_back(Threshold::parse(text));

  bool want_inv = false, want_sitad = false;
  for (auto e : engines) {
    want_inv = want_inv || e == Engine::kInv;
    want_sitad = want_sitad || e == Engine::kSitad;
  }
  std::optional<InvertedIndex> inv;
  if (want_inv) inv.emplace(InvertedIndex::build(db));
  std::optional<Index> sitad;
  if (want_sitad) sitad.emplace(Index::build(db));

  BenchReport report;
  report.database_size = db.size();
  for (auto engine : engines) {
    for (std::size_t i = 0; i < epses.size(); ++i) {
      const auto& eps = epses[i];
      switch (engine) {
        case Engine::kOva:
          report.rows.push_back(detail::bench_engine(
              [&](const Descriptor& q, QueryStats* s) { ova_search(db, q, eps, s); }, engine, eps_texts[i],
              queries, reps, database_memory_bytes(db)));
          break;
        case Engine::kInv:
          report.rows.push_back(detail::bench_engine(
              [&](const Descriptor& q, QueryStats* s) { inv->search(q, eps, s); }, engine, eps_texts[i], queries,
              reps, inv->memory_bytes()));
          break;
        case Engine::kSitad:
          report.rows.push_back(detail::bench_engine(
              [&](const Descriptor& q, QueryStats* s) { sitad->search(q, eps, s); }, engine, eps_texts[i],
              queries, reps, sitad->serialized_bytes()));
          break;
      }
    }
  }
  return report;
}

inline void write_bench_csv(std::ostream& os, const BenchReport& report) {
  os << "engine,eps,db_size,queries,reps,mean_time_ms,stddev_time_ms,index_bytes,"
        "mean_selected_blocks,mean_traversed_nodes,mean_rank_ops,mean_results\n";
  for (const auto& row : report.rows) {
    os << engine_name(row.engine) << ',' << row.eps << ',' << report.database_size << ',' << row.queries << ','
       << row.reps << ',' << std::fixed << std::setprecision(6) << row.mean_ms << ',' << row.stddev_ms << ','
       << row.index_bytes << ',' << std::setprecision(3) << row.mean_selected_blocks << ','
       << row.mean_traversed_nodes << ',' << row.mean_rank_ops << ',' << row.mean_results << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

inline void print_bench_table(std::ostream& os, const BenchReport& report) {
  os << "db size: " << report.database_size << "\n";
  os << std::left << std::setw(7) << "engine" << std::setw(8) << "eps" << std::right << std::setw(14)
     << "mean ms" << std::setw(14) << "stddev ms" << std::setw(14) << "index bytes" << std::setw(10) << "blocks"
     << std::setw(12) << "nodes" << std::setw(12) << "ranks" << std::setw(10) << "hits" << "\n";
  for (const auto& row : report.rows) {
    os << std::left << std::setw(7) << engine_name(row.engine) << std::setw(8) << row.eps << std::right
       << std::fixed << std::setprecision(4) << std::setw(14) << row.mean_ms << std::setw(14) << row.stddev_ms
       << std::setw(14) << row.index_bytes << std::setprecision(1) << std::setw(10) << row.mean_selected_blocks
       << std::setw(12) << row.mean_traversed_nodes << std::setw(12) << row.mean_rank_ops << std::setw(10)
       << row.mean_results << "\n";
    os.unsetf(std::ios::floatfield);
  }
}

}  // namespace sitad
