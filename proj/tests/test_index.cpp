#include <cstdint>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "sitad/index.hpp"

using namespace sitad;

namespace {

Database random_db(std::size_t n, std::mt19937& rng, std::uint64_t dim_pool = 30, std::uint64_t max_w = 5) {
  Database db;
  std::uniform_int_distribution<std::uint64_t> dim_count(1, 6);
  std::uniform_int_distribution<std::uint64_t> dim(1, dim_pool);
  std::uniform_int_distribution<std::uint64_t> weight(1, max_w);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::uint64_t> dims;
    const auto want = dim_count(rng);
    while (dims.size() < want) dims.insert(dim(rng));
    std::vector<Entry> entries;
    for (auto d : dims) entries.push_back({d, weight(rng)});
    db.add({i + 1, Descriptor::from_entries(std::move(entries))});
  }
  return db;
}

std::vector<SearchHit> brute_force(const Database& db, const Descriptor& q, const Threshold& eps) {
  std::vector<SearchHit> hits;
  const std::uint64_t norm_q = squared_norm(q);
  for (const auto& rec : db.records()) {
    if (rec.desc.empty()) continue;
    const std::uint64_t nx = squared_norm(rec.desc);
    const std::uint64_t d = dot(rec.desc, q);
    if (jaccard_geq_parts(d, nx, norm_q, eps)) {
      hits.push_back({rec.id, similarity_from_parts(d, nx, norm_q)});
    }
  }
  sort_hits(hits);
  return hits;
}

std::string serialized(const Index& idx) {
  std::ostringstream os(std::ios::binary);
  detail::Writer w(os);
  idx.save(w);
  return std::move(os).str();
}

Index deserialize(const std::string& bytes) {
  std::istringstream is(bytes);
  detail::Reader r(is);
  return Index::load(r);
}

}  // namespace

TEST_CASE("index search equals brute force across databases and thresholds") {
  std::mt19937 rng(2024);
  const char* ladder[] = {"0.3", "0.5", "0.7", "0.9", "0.95", "1"};
  for (std::size_t n : {1, 2, 3, 7, 16, 33, 100}) {
    const auto db = random_db(n, rng);
    const auto idx = Index::build(db);
    REQUIRE(idx.record_count() == n);
    for (int round = 0; round < 8; ++round) {
      const auto& q = db.records()[rng() % db.size()].desc;
      for (const char* e : ladder) {
        const auto eps = Threshold::parse(e);
        REQUIRE(idx.search(q, eps) == brute_force(db, q, eps));
      }
    }
  }
}

TEST_CASE("selected blocks equal the norm-compatible candidates") {
  std::mt19937 rng(11);
  const auto db = random_db(120, rng);
  const auto idx = Index::build(db);
  const auto set = BlockSet::partition(db.records());
  for (int round = 0; round < 30; ++round) {
    const auto& q = db.records()[rng() % db.size()].desc;
    for (const char* e : {"0.4", "0.8", "0.95", "1"}) {
      const auto eps = Threshold::parse(e);
      QueryStats stats;
      idx.search(q, eps, &stats);
      REQUIRE(stats.selected_blocks == set.candidate_norms(q, eps).size());
    }
  }
}

TEST_CASE("hits come back ordered by similarity then id") {
  Database db;
  db.add({5, Descriptor::from_entries({{1, 2}})});
  db.add({2, Descriptor::from_entries({{1, 2}})});
  db.add({9, Descriptor::from_entries({{1, 2}, {2, 1}})});
  const auto idx = Index::build(db);
  const auto q = Descriptor::from_entries({{1, 2}});
  const auto hits = idx.search(q, Threshold::parse("0.3"));
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].id == 2);
  CHECK(hits[1].id == 5);
  CHECK(hits[2].id == 9);
  CHECK(hits[0].similarity == Rational{1, 1});
  CHECK(rational_less(hits[2].similarity, hits[1].similarity));
}

TEST_CASE("empty descriptors are skipped and reported") {
  Database db;
  db.add({1, Descriptor::from_entries({{3, 2}})});
  db.add({2, Descriptor{}});
  db.add({3, Descriptor::from_entries({{3, 2}, {4, 1}})});
  const auto idx = Index::build(db);
  CHECK(idx.skipped_ids() == std::vector<DescriptorId>{2});
  CHECK(idx.record_count() == 2);
  const auto hits = idx.search(Descriptor::from_entries({{3, 2}}), Threshold::parse("1"));
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].id == 1);
}

TEST_CASE("searching an empty index finds nothing") {
  const auto idx = Index::build(Database{});
  QueryStats stats;
  CHECK(idx.search(Descriptor::from_entries({{1, 1}}), Threshold::parse("0.5"), &stats).empty());
  CHECK(stats.selected_blocks == 0);
  CHECK(stats.traversed_nodes == 0);
}

TEST_CASE("empty queries are rejected") {
  std::mt19937 rng(3);
  const auto idx = Index::build(random_db(5, rng));
  CHECK_THROWS_AS(idx.search(Descriptor{}, Threshold::parse("0.5")), std::invalid_argument);
}

TEST_CASE("serialization round-trips with identical bytes and results") {
  std::mt19937 rng(17);
  const auto db = random_db(80, rng);
  const auto idx = Index::build(db);
  const auto bytes = serialized(idx);
  const auto loaded = deserialize(bytes);

  CHECK(loaded.record_count() == idx.record_count());
  CHECK(loaded.max_dim() == idx.max_dim());
  CHECK(loaded.max_weight() == idx.max_weight());
  CHECK(serialized(loaded) == bytes);

  for (int round = 0; round < 20; ++round) {
    const auto& q = db.records()[rng() % db.size()].desc;
    for (const char* e : {"0.5", "0.9", "1"}) {
      const auto eps = Threshold::parse(e);
      QueryStats s1, s2;
      REQUIRE(loaded.search(q, eps, &s1) == idx.search(q, eps, &s2));
      REQUIRE(s1 == s2);
    }
  }
}

TEST_CASE("directory sections tile the payload region exactly") {
  std::mt19937 rng(23);
  const auto idx = Index::build(random_db(40, rng));
  std::ostringstream os(std::ios::binary);
  detail::Writer w(os);
  const auto report = idx.save(w);
  REQUIRE(report.sections.size() == idx.blocks().size());
  std::uint64_t expect = report.header_bytes;
  std::uint64_t component_total = 0;
  for (std::size_t i = 0; i < report.sections.size(); ++i) {
    REQUIRE(report.sections[i].offset == expect);
    REQUIRE(report.sections[i].bytes == idx.blocks()[i].component_bytes().total());
    expect += report.sections[i].bytes;
    component_total += report.sections[i].bytes;
  }
  CHECK(report.total_bytes == expect + 4);  // checksum trailer
  CHECK(report.total_bytes == os.str().size());
  CHECK(idx.component_bytes().total() == component_total);
}

TEST_CASE("an empty database still serializes to a loadable index") {
  const auto idx = Index::build(Database{});
  const auto bytes = serialized(idx);
  const auto loaded = deserialize(bytes);
  CHECK(loaded.record_count() == 0);
  CHECK(loaded.blocks().empty());
  CHECK(loaded.search(Descriptor::from_entries({{1, 1}}), Threshold::parse("0.5")).empty());
}

TEST_CASE("corrupted index files are rejected") {
  std::mt19937 rng(31);
  const auto idx = Index::build(random_db(20, rng));
  const auto bytes = serialized(idx);

  SECTION("wrong magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize(bad), detail::IoError);
  }
  SECTION("unsupported version") {
    auto bad = bytes;
    bad[4] = static_cast<char>(static_cast<unsigned char>(bad[4]) + 1);
    CHECK_THROWS_AS(deserialize(bad), detail::IoError);
  }
  SECTION("truncated payload") {
    for (std::size_t keep : {bytes.size() - 1, bytes.size() / 2, std::size_t{7}}) {
      CHECK_THROWS_AS(deserialize(bytes.substr(0, keep)), detail::IoError);
    }
  }
  SECTION("flipped payload byte fails the checksum") {
    auto bad = bytes;
    bad[bytes.size() / 2] = static_cast<char>(static_cast<unsigned char>(bad[bytes.size() / 2]) ^ 0x40);
    CHECK_THROWS_AS(deserialize(bad), detail::IoError);
  }
}

TEST_CASE("file save and load round-trip through the filesystem") {
  std::mt19937 rng(41);
  const auto db = random_db(25, rng);
  const auto idx = Index::build(db);
  const auto path = std::string("test_index_roundtrip.sitad");
  const auto report = idx.save_file(path);
  const auto loaded = Index::load_file(path);
  CHECK(serialized(loaded) == serialized(idx));
  CHECK(report.total_bytes == serialized(idx).size());
  std::remove(path.c_str());
  CHECK_THROWS_AS(Index::load_file(path), detail::IoError);
}

TEST_CASE("concurrent readers see identical results") {
  std::mt19937 rng(53);
  const auto db = random_db(200, rng, 40, 6);
  const auto idx = Index::build(db);
  const auto eps = Threshold::parse("0.6");

  std::vector<const Descriptor*> queries;
  for (int i = 0; i < 40; ++i) queries.push_back(&db.records()[rng() % db.size()].desc);
  std::vector<std::vector<SearchHit>> expected;
  for (const auto* q : queries) expected.push_back(idx.search(*q, eps));

  std::vector<int> mismatches(4, 0);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int rep = 0; rep < 25; ++rep) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
          if (idx.search(*queries[i], eps) != expected[i]) ++mismatches[t];
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(mismatches == std::vector<int>(4, 0));
}
