// Command-line front end: dataset generation, index construction, querying
// with interchangeable engines, and benchmarking.
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sitad/baselines.hpp"
#include "sitad/bench.hpp"
#include "sitad/database.hpp"
#include "sitad/generator.hpp"
#include "sitad/index.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Resident set size in KiB, or 0 if the platform doesn't expose it.
long read_vm_rss_kib() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::istringstream is(line.substr(6));
      long kib = 0;
      is >> kib;
      return kib;
    }
  }
  return 0;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw sitad::detail::IoError("cannot open " + path + " for writing");
  return os;
}

struct GenArgs {
  std::uint64_t n = 1000;
  std::uint64_t d = 1000;
  std::uint64_t m = 5;
  double density = 8.0;
  std::uint64_t seed = 1;
  double dup_rate = 0.1;
  std::string out;
};

int run_gen(const GenArgs& a) {
  const auto db = sitad::generate(
      {.count = a.n, .dim = a.d, .max_weight = a.m, .density = a.density, .seed = a.seed, .dup_rate = a.dup_rate});
  auto os = open_output(a.out);
  os << "# descriptor database: count=" << a.n << " dim=" << a.d << " max_weight=" << a.m
     << " density=" << a.density << " seed=" << a.seed << " dup_rate=" << a.dup_rate << "\n";
  db.write_text(os);
  os.flush();
  if (!os) throw sitad::detail::IoError("failed writing " + a.out);
  std::cout << "wrote " << db.size() << " records to " << a.out << "\n";
  return kExitOk;
}

struct BuildArgs {
  std::string in;
  std::string out;
};

int run_build(const BuildArgs& a) {
  const long rss_before = read_vm_rss_kib();
  const auto t_load = std::chrono::steady_clock::now();
  const auto db = sitad::Database::load_text_file(a.in);
  const double load_s = seconds_since(t_load);

  const auto t_build = std::chrono::steady_clock::now();
  const auto idx = sitad::Index::build(db);
  const double build_s = seconds_since(t_build);
  const long rss_after = read_vm_rss_kib();

  if (!idx.skipped_ids().empty()) {
    std::cerr << "warning: skipped " << idx.skipped_ids().size() << " empty descriptor(s), first id "
              << idx.skipped_ids().front() << "\n";
  }

  const auto report = idx.save_file(a.out);
  const auto parts = idx.component_bytes();
  const std::uint64_t directory = report.header_bytes;

  std::cout << "records indexed:    " << idx.record_count() << "\n"
            << "blocks:             " << idx.blocks().size() << "\n"
            << "max dimension:      " << idx.max_dim() << "\n"
            << "max weight:         " << idx.max_weight() << "\n"
            << "load time:          " << load_s << " s\n"
            << "build time:         " << build_s << " s\n"
            << "index bytes:        " << report.total_bytes << " -> " << a.out << "\n"
            << "  header+directory: " << directory << "\n"
            << "  block headers:    " << parts.header << "\n"
            << "  id maps:          " << parts.ids << "\n"
            << "  dimension spans:  " << parts.offsets << "\n"
            << "  bitvectors:       " << parts.bits << "\n"
            << "  weight arrays:    " << parts.weights << "\n"
            << "  checksum:         4\n"
            << "rss delta:          " << (rss_after - rss_before) << " KiB\n";
  return kExitOk;
}

struct QueryArgs {
  std::string index;
  std::string queries;
  std::string eps;
  std::string engine = "sitad";
  std::string out;
  bool stats = false;
};

int run_query(const QueryArgs& a) {
  sitad::Threshold eps = sitad::Threshold::parse(a.eps);
  const auto engine = sitad::parse_engine(a.engine);
  if (!engine) throw std::invalid_argument("unknown engine '" + a.engine + "'");

  // ova/inv read the database text directly; sitad reads a built index file
  std::optional<sitad::Database> db;
  std::optional<sitad::InvertedIndex> inv;
  std::optional<sitad::Index> idx;
  switch (*engine) {
    case sitad::Engine::kOva:
      db.emplace(sitad::Database::load_text_file(a.index));
      break;
    case sitad::Engine::kInv:
      db.emplace(sitad::Database::load_text_file(a.index));
      inv.emplace(sitad::InvertedIndex::build(*db));
      break;
    case sitad::Engine::kSitad:
      idx.emplace(sitad::Index::load_file(a.index));
      break;
  }

  const auto query_db = sitad::Database::load_text_file(a.queries);
  auto os = open_output(a.out);
  os << "query_id,match_id,similarity\n";

  std::optional<std::ofstream> stats_os;
  if (a.stats) {
    stats_os = open_output(a.out + ".stats");
    *stats_os << "query_id,selected_blocks,traversed_nodes,rank_ops,results\n";
  }

  std::uint64_t rows = 0;
  for (const auto& rec : query_db.records()) {
    if (rec.desc.empty()) {
      std::cerr << "warning: skipping empty query id " << rec.id << "\n";
      continue;
    }
    sitad::QueryStats stats;
    std::vector<sitad::SearchHit> hits;
    switch (*engine) {
      case sitad::Engine::kOva:
        hits = sitad::ova_search(*db, rec.desc, eps, &stats);
        break;
      case sitad::Engine::kInv:
        hits = inv->search(rec.desc, eps, &stats);
        break;
      case sitad::Engine::kSitad:
        hits = idx->search(rec.desc, eps, &stats);
        break;
    }
    for (const auto& hit : hits) {
      os << rec.id << ',' << hit.id << ',' << hit.similarity.to_decimal(6) << '\n';
      ++rows;
    }
    if (stats_os) {
      *stats_os << rec.id << ',' << stats.selected_blocks << ',' << stats.traversed_nodes << ','
                << stats.rank_ops << ',' << stats.results << '\n';
    }
  }
  os.flush();
  if (!os) throw sitad::detail::IoError("failed writing " + a.out);
  std::cout << rows << " match rows -> " << a.out << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string db_path;
  std::string query_path;
  std::vector<std::string> eps_list;
  std::vector<std::string> engine_list{"ova", "inv", "sitad"};
  int reps = 3;
  std::uint64_t query_count = 100;
  std::uint64_t seed = 1;
  std::string csv_out;
};

int run_bench_cmd(const BenchArgs& a) {
  for (const auto& e : a.eps_list) sitad::Threshold::parse(e);  // validate up front
  std::vector<sitad::Engine> engines;
  for (const auto& name : a.engine_list) {
    const auto e = sitad::parse_engine(name);
    if (!e) throw std::invalid_argument("unknown engine '" + name + "'");
    engines.push_back(*e);
  }

  const auto db = sitad::Database::load_text_file(a.db_path);
  std::vector<sitad::Descriptor> queries;
  if (!a.query_path.empty()) {
    const auto qdb = sitad::Database::load_text_file(a.query_path);
    for (const auto& rec : qdb.records()) {
      if (rec.desc.empty()) {
        std::cerr << "warning: skipping empty query id " << rec.id << "\n";
        continue;
      }
      queries.push_back(rec.desc);
    }
  } else {
    queries = sitad::sample_queries(db, a.query_count, a.seed);
  }

  const auto report = sitad::run_bench(db, queries, a.eps_list, engines, a.reps);
  sitad::print_bench_table(std::cout, report);
  if (!a.csv_out.empty()) {
    auto os = open_output(a.csv_out);
    sitad::write_bench_csv(os, report);
    os.flush();
    if (!os) throw sitad::detail::IoError("failed writing " + a.csv_out);
    std::cout << "csv -> " << a.csv_out << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"output-sensitive threshold similarity search over sparse non-negative integer descriptors"};
  app.require_subcommand(1);
  int rc = kExitOk;

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic descriptor database");
  gen->add_option("-n,--count", gen_args.n, "number of records");
  gen->add_option("-d,--dim", gen_args.d, "dimension pool size");
  gen->add_option("-m,--max-weight", gen_args.m, "maximum entry weight");
  gen->add_option("--density", gen_args.density, "mean entries per record");
  gen->add_option("--seed", gen_args.seed, "random seed");
  gen->add_option("--dup-rate", gen_args.dup_rate, "near-duplicate fraction in [0,1)");
  gen->add_option("-o,--out", gen_args.out, "output database file")->required();
  gen->callback([&] { rc = run_gen(gen_args); });

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "build an index file from a database");
  build->add_option("-i,--in", build_args.in, "database text file")->required();
  build->add_option("-o,--out", build_args.out, "output index file")->required();
  build->callback([&] { rc = run_build(build_args); });

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "run a query file against a database or index");
  query->add_option("-x,--index", query_args.index,
                    "index file (engine sitad) or database text file (engines ova/inv)")
      ->required();
  query->add_option("-q,--queries", query_args.queries, "query descriptor text file")->required();
  query->add_option("-e,--eps", query_args.eps, "similarity threshold in (0,1]")->required();
  query->add_option("--engine", query_args.engine, "ova, inv, or sitad");
  query->add_option("-o,--out", query_args.out, "output CSV file")->required();
  query->add_flag("--stats", query_args.stats, "also write per-query counters to <out>.stats");
  query->callback([&] { rc = run_query(query_args); });

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "benchmark engines over a query set");
  bench->add_option("-i,--in", bench_args.db_path, "database text file")->required();
  bench->add_option("-q,--queries", bench_args.query_path, "query file (default: sample from the database)");
  bench->add_option("-e,--eps", bench_args.eps_list, "thresholds to sweep")->required()->delimiter(',');
  bench->add_option("--engines", bench_args.engine_list, "engines to run")->delimiter(',');
  bench->add_option("--reps", bench_args.reps, "timed repetitions per engine");
  bench->add_option("--queries-count", bench_args.query_count, "sampled query count when no query file is given");
  bench->add_option("--seed", bench_args.seed, "sampling seed");
  bench->add_option("-o,--csv", bench_args.csv_out, "also write rows to a CSV file");
  bench->callback([&] { rc = run_bench_cmd(bench_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const sitad::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const sitad::detail::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return rc;
}
