#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "sitad/database.hpp"

using namespace sitad;

static Database from_string(const std::string& text) {
  std::istringstream in(text);
  return Database::load_text(in);
}

TEST_CASE("database loads records, skipping comments and blank lines") {
  const auto db = from_string(
      "# molecular descriptors\n"
      "1\t1:3 3:1 4:2\n"
      "\n"
      "2\t2:5\n"
      "# trailing comment\n");
  REQUIRE(db.size() == 2);
  CHECK(db.records()[0].id == 1);
  CHECK(db.records()[1].id == 2);
  CHECK(db.max_dim() == 4);
  CHECK(db.max_weight() == 5);
  CHECK(db.total_entries() == 4);
}

TEST_CASE("database preserves file order") {
  const auto db = from_string("9\t1:1\n3\t2:2\n7\t3:3\n");
  CHECK(db.records()[0].id == 9);
  CHECK(db.records()[1].id == 3);
  CHECK(db.records()[2].id == 7);
}

TEST_CASE("duplicate record ids are rejected with the line number") {
  try {
    from_string("1\t1:1\n2\t2:1\n1\t3:1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("duplicate record id 1") != std::string::npos);
  }
}

TEST_CASE("parse failures carry the line number") {
  try {
    from_string("1\t1:1\nbogus line\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("ingest enforces the weight bound") {
  CHECK_NOTHROW(from_string("1\t1:65536\n"));
  CHECK_THROWS_AS(from_string("1\t1:65537\n"), ParseError);
}

TEST_CASE("empty and comment-only input yields an empty database") {
  CHECK(from_string("").empty());
  CHECK(from_string("# nothing\n\n").empty());
}

TEST_CASE("empty descriptors are kept in the database") {
  const auto db = from_string("4\t\n");
  REQUIRE(db.size() == 1);
  CHECK(db.records()[0].desc.empty());
}

TEST_CASE("write_text round-trips") {
  const std::string text = "1\t1:3 3:1 4:2\n2\t2:5\n3\t\n";
  const auto db = from_string(text);
  std::ostringstream out;
  db.write_text(out);
  CHECK(out.str() == text);
  const auto again = from_string(out.str());
  REQUIRE(again.size() == db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    CHECK(again.records()[i] == db.records()[i]);
  }
}

TEST_CASE("missing database file raises an io error") {
  CHECK_THROWS_AS(Database::load_text_file("/nonexistent/path/db.txt"), detail::IoError);
}

TEST_CASE("crlf input parses identically to lf input") {
  const auto lf = from_string("1\t1:2 2:3\n");
  const auto crlf = from_string("1\t1:2 2:3\r\n");
  CHECK(lf.records()[0] == crlf.records()[0]);
}
