#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SITAD_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return std::move(os).str();
}

struct Workspace {
  fs::path dir;

  explicit Workspace(const std::string& name) : dir(fs::path("cli_ws") / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

std::vector<std::string> body_lines(const std::string& csv_text) {
  std::istringstream is(csv_text);
  std::string line;
  std::vector<std::string> lines;
  bool first = true;
  while (std::getline(is, line)) {
    if (!first) lines.push_back(line);
    first = false;
  }
  return lines;
}

}  // namespace

TEST_CASE("cli requires a subcommand and honors --help") {
  CHECK(run("") == 1);
  CHECK(run("--help") == 0);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("generation is reproducible from the command line") {
  Workspace ws("gen");
  REQUIRE(run("gen -n 40 -d 30 -m 4 --density 5 --seed 9 -o " + ws / "a.txt") == 0);
  REQUIRE(run("gen -n 40 -d 30 -m 4 --density 5 --seed 9 -o " + ws / "b.txt") == 0);
  REQUIRE(run("gen -n 40 -d 30 -m 4 --density 5 --seed 10 -o " + ws / "c.txt") == 0);
  CHECK(slurp(ws / "a.txt") == slurp(ws / "b.txt"));
  CHECK(slurp(ws / "a.txt") != slurp(ws / "c.txt"));
}

TEST_CASE("zero-count generation leaves a loadable header-only database") {
  Workspace ws("gen0");
  REQUIRE(run("gen -n 0 -d 10 -m 2 -o " + ws / "empty.txt") == 0);
  const auto text = slurp(ws / "empty.txt");
  CHECK(text.rfind("#", 0) == 0);
  REQUIRE(run("build -i " + ws / "empty.txt" + " -o " + ws / "empty.sitad") == 0);
  REQUIRE(run("gen -n 5 -d 10 -m 2 --seed 2 -o " + ws / "q.txt") == 0);
  REQUIRE(run("query -x " + ws / "empty.sitad" + " -q " + ws / "q.txt" + " -e 0.5 -o " + ws / "out.csv") == 0);
  CHECK(body_lines(slurp(ws / "out.csv")).empty());
}

TEST_CASE("the engines emit identical query output") {
  Workspace ws("engines");
  REQUIRE(run("gen -n 120 -d 60 -m 5 --density 6 --seed 4 --dup-rate 0.2 -o " + ws / "db.txt") == 0);
  REQUIRE(run("gen -n 15 -d 60 -m 5 --density 6 --seed 77 -o " + ws / "q.txt") == 0);
  REQUIRE(run("build -i " + ws / "db.txt" + " -o " + ws / "db.sitad") == 0);

  for (const char* eps : {"0.4", "0.95"}) {
    REQUIRE(run(std::string("query -x ") + (ws / "db.txt") + " -q " + (ws / "q.txt") + " -e " + eps +
                " --engine ova -o " + (ws / "ova.csv")) == 0);
    REQUIRE(run(std::string("query -x ") + (ws / "db.txt") + " -q " + (ws / "q.txt") + " -e " + eps +
                " --engine inv -o " + (ws / "inv.csv")) == 0);
    REQUIRE(run(std::string("query -x ") + (ws / "db.sitad") + " -q " + (ws / "q.txt") + " -e " + eps +
                " --engine sitad -o " + (ws / "sitad.csv")) == 0);
    const auto ova = slurp(ws / "ova.csv");
    CHECK(ova == slurp(ws / "inv.csv"));
    CHECK(ova == slurp(ws / "sitad.csv"));
  }
}

TEST_CASE("query output is sorted and similarities respect the threshold") {
  Workspace ws("csv");
  REQUIRE(run("gen -n 100 -d 40 -m 4 --density 6 --seed 12 --dup-rate 0.3 -o " + ws / "db.txt") == 0);
  REQUIRE(run("build -i " + ws / "db.txt" + " -o " + ws / "db.sitad") == 0);
  REQUIRE(run("query -x " + ws / "db.sitad" + " -q " + ws / "db.txt" + " -e 0.8 -o " + ws / "out.csv") == 0);

  const auto lines = body_lines(slurp(ws / "out.csv"));
  REQUIRE_FALSE(lines.empty());
  long prev_q = -1;
  double prev_sim = 2.0;
  long prev_match = -1;
  bool self_seen = false;
  for (const auto& line : lines) {
    std::istringstream is(line);
    long q, match;
    double sim;
    char c1, c2;
    REQUIRE((is >> q >> c1 >> match >> c2 >> sim));
    REQUIRE(c1 == ',');
    REQUIRE(c2 == ',');
    REQUIRE(sim >= 0.8 - 5e-7);  // half an ULP of the 6-decimal rendering
    REQUIRE(sim <= 1.0);
    if (q != prev_q) {
      REQUIRE(q > prev_q);  // query file order is ascending ids
      prev_sim = 2.0;
      prev_match = -1;
    }
    REQUIRE(sim <= prev_sim);
    if (sim == prev_sim) REQUIRE(match > prev_match);
    self_seen = self_seen || (q == match && sim == 1.0);
    prev_q = q;
    prev_sim = sim;
    prev_match = match;
  }
  CHECK(self_seen);
}

TEST_CASE("per-query counters land in the stats side file") {
  Workspace ws("stats");
  REQUIRE(run("gen -n 60 -d 30 -m 3 --density 5 --seed 6 -o " + ws / "db.txt") == 0);
  REQUIRE(run("gen -n 7 -d 30 -m 3 --density 5 --seed 8 -o " + ws / "q.txt") == 0);
  REQUIRE(run("build -i " + ws / "db.txt" + " -o " + ws / "db.sitad") == 0);
  REQUIRE(run("query -x " + ws / "db.sitad" + " -q " + ws / "q.txt" + " -e 0.6 -o " + ws / "out.csv" +
              " --stats") == 0);
  const auto stats = slurp(ws / "out.csv.stats");
  CHECK(stats.rfind("query_id,selected_blocks,traversed_nodes,rank_ops,results", 0) == 0);
  CHECK(body_lines(stats).size() == 7);
}

TEST_CASE("empty queries are skipped with a warning") {
  Workspace ws("emptyq");
  REQUIRE(run("gen -n 20 -d 15 -m 3 --density 4 --seed 5 -o " + ws / "db.txt") == 0);
  REQUIRE(run("build -i " + ws / "db.txt" + " -o " + ws / "db.sitad") == 0);
  {
    std::ofstream q(ws / "q.txt");
    q << "1\t3:2\n2\t\n3\t5:1\n";
  }
  REQUIRE(run("query -x " + ws / "db.sitad" + " -q " + ws / "q.txt" + " -e 0.0001 -o " + ws / "out.csv") == 0);
  CHECK(slurp("cli_stderr.txt").find("skipping empty query id 2") != std::string::npos);
  for (const auto& line : body_lines(slurp(ws / "out.csv"))) {
    CHECK(line.rfind("2,", 0) != 0);
  }
}

TEST_CASE("usage errors exit with code 1") {
  Workspace ws("usage");
  REQUIRE(run("gen -n 10 -d 10 -m 2 -o " + ws / "db.txt") == 0);
  REQUIRE(run("build -i " + ws / "db.txt" + " -o " + ws / "db.sitad") == 0);
  const std::string q = " -q " + (ws / "db.txt") + " -o " + (ws / "out.csv");
  CHECK(run("query -x " + ws / "db.sitad" + q + " -e 1.5") == 1);
  CHECK(run("query -x " + ws / "db.sitad" + q + " -e 0") == 1);
  CHECK(run("query -x " + ws / "db.sitad" + q + " -e abc") == 1);
  CHECK(run("query -x " + ws / "db.sitad" + q + " -e 0.5 --engine warp") == 1);
  CHECK(run("query -x " + ws / "db.sitad" + q) == 1);  // missing -e
  CHECK(run("gen -n 5 -d 0 -o " + ws / "bad.txt") == 1);
}

TEST_CASE("data errors exit with code 2") {
  Workspace ws("data");
  REQUIRE(run("gen -n 30 -d 20 -m 3 --density 4 --seed 2 -o " + ws / "db.txt") == 0);
  REQUIRE(run("build -i " + ws / "db.txt" + " -o " + ws / "db.sitad") == 0);
  const std::string q = " -q " + (ws / "db.txt") + " -e 0.5 -o " + (ws / "out.csv");

  SECTION("missing files") {
    CHECK(run("build -i " + ws / "nope.txt" + " -o " + ws / "x.sitad") == 2);
    CHECK(run("query -x " + ws / "nope.sitad" + q) == 2);
    CHECK(run("query -x " + ws / "db.sitad" + " -q " + ws / "nope.txt" + " -e 0.5 -o " + ws / "o.csv") == 2);
  }
  SECTION("malformed database text") {
    std::ofstream bad(ws / "bad.txt");
    bad << "1\t3:2\nnot a record\n";
    bad.close();
    CHECK(run("build -i " + ws / "bad.txt" + " -o " + ws / "bad.sitad") == 2);
    CHECK(slurp("cli_stderr.txt").find("line 2") != std::string::npos);
  }
  SECTION("corrupted index file") {
    auto bytes = slurp(ws / "db.sitad");
    bytes[bytes.size() / 2] = static_cast<char>(static_cast<unsigned char>(bytes[bytes.size() / 2]) ^ 0x11);
    std::ofstream(ws / "corrupt.sitad", std::ios::binary) << bytes;
    CHECK(run("query -x " + ws / "corrupt.sitad" + q) == 2);
  }
  SECTION("engine and input type mismatched") {
    CHECK(run("query -x " + ws / "db.txt" + q + " --engine sitad") == 2);
    CHECK(run("query -x " + ws / "db.sitad" + q + " --engine ova") == 2);
  }
}

TEST_CASE("bench writes a csv over the requested grid") {
  Workspace ws("bench");
  REQUIRE(run("gen -n 80 -d 40 -m 4 --density 5 --seed 14 --dup-rate 0.2 -o " + ws / "db.txt") == 0);
  REQUIRE(run("bench -i " + ws / "db.txt" + " -e 0.5,0.9 --engines inv,sitad --reps 1 --queries-count 8 -o " +
              ws / "bench.csv") == 0);
  const auto lines = body_lines(slurp(ws / "bench.csv"));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].rfind("inv,0.5,80,8,1,", 0) == 0);
  CHECK(lines[3].rfind("sitad,0.9,80,8,1,", 0) == 0);
  CHECK(slurp("cli_stdout.txt").find("mean ms") != std::string::npos);
}
