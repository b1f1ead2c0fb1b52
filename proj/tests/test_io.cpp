#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "mtgbn/io.hpp"

using namespace mtgbn;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, removed on destruction.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("mtgbn_io_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void put(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name));
    out << content;
  }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("csv values round trip bit for bit") {
  Scratch s;
  Rng rng(111);
  Eigen::MatrixXd m(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = rng.normal() * std::pow(10.0, (int)rng.below(7) - 3);
  m(0, 0) = 1.0 / 3.0;
  m(1, 1) = -0.0;
  write_csv_matrix(s.path("a.csv"), m, {"A", "B", "C"});
  CsvMatrix back = read_csv_matrix(s.path("a.csv"));
  CHECK(back.header == std::vector<std::string>{"A", "B", "C"});
  REQUIRE(back.values.rows() == 4);
  REQUIRE(back.values.cols() == 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) CHECK(back.values(i, j) == m(i, j));
}

TEST_CASE("headerless csv reads as pure numbers") {
  Scratch s;
  s.put("b.csv", "1,2\n3.5,-4e2\n");
  CsvMatrix got = read_csv_matrix(s.path("b.csv"));
  CHECK(got.header.empty());
  REQUIRE(got.values.rows() == 2);
  CHECK(got.values(0, 1) == 2.0);
  CHECK(got.values(1, 1) == -400.0);

  Eigen::MatrixXd m(1, 2);
  m << 7.0, 8.0;
  write_csv_matrix(s.path("c.csv"), m);
  CsvMatrix back = read_csv_matrix(s.path("c.csv"));
  CHECK(back.header.empty());
  CHECK(back.values(0, 0) == 7.0);
}

TEST_CASE("csv header detection keys on non-numeric fields") {
  Scratch s;
  s.put("d.csv", "X1,X2\n0.5,0.25\n");
  CsvMatrix got = read_csv_matrix(s.path("d.csv"));
  CHECK(got.header == std::vector<std::string>{"X1", "X2"});
  CHECK(got.values.rows() == 1);
}

TEST_CASE("malformed csv inputs are rejected") {
  Scratch s;
  s.put("ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(read_csv_matrix(s.path("ragged.csv")), IoError);
  s.put("empty.csv", "");
  CHECK_THROWS_AS(read_csv_matrix(s.path("empty.csv")), IoError);
  s.put("text.csv", "A,B\n1,oops\n");
  CHECK_THROWS_AS(read_csv_matrix(s.path("text.csv")), IoError);
  CHECK_THROWS_AS(read_csv_matrix(s.path("missing.csv")), IoError);
}

TEST_CASE("csv writing refuses a header of the wrong width") {
  Scratch s;
  Eigen::MatrixXd m(1, 2);
  m << 1.0, 2.0;
  CHECK_THROWS_AS(write_csv_matrix(s.path("e.csv"), m, {"only_one"}), IoError);
}

TEST_CASE("directed graph files round trip") {
  Scratch s;
  Rng rng(112);
  Dag d = random_dag(7, 9, rng);
  write_dag(s.path("g.txt"), d);
  Dag back = read_dag(s.path("g.txt"));
  CHECK(back == d);
}

TEST_CASE("undirected graph files round trip") {
  Scratch s;
  UGraph g({"alpha", "beta", "gamma"}, {{0, 1}, {1, 2}});
  write_ugraph(s.path("u.txt"), g);
  UGraph back = read_ugraph(s.path("u.txt"));
  CHECK(back == g);
}

TEST_CASE("graph parsing honors declarations, comments, and first-use order") {
  Scratch s;
  s.put("h.txt", "# a comment\nC\nA\nA -> B\nC -> A\n");
  Dag d = read_dag(s.path("h.txt"));
  // Declared nodes first (C, A), then B appended at first use.
  CHECK(d.names() == std::vector<std::string>{"C", "A", "B"});
  CHECK(d.has_edge(1, 2));  // A -> B
  CHECK(d.has_edge(0, 1));  // C -> A
  CHECK(d.num_edges() == 2);
}

TEST_CASE("edge kind mismatches are io errors") {
  Scratch s;
  s.put("und.txt", "A -- B\n");
  CHECK_THROWS_AS(read_dag(s.path("und.txt")), IoError);
  s.put("dir.txt", "A -> B\n");
  CHECK_THROWS_AS(read_ugraph(s.path("dir.txt")), IoError);
}

TEST_CASE("broken graph files are io errors") {
  Scratch s;
  s.put("junk.txt", "A -> \n");
  CHECK_THROWS_AS(read_dag(s.path("junk.txt")), IoError);
  s.put("cycle.txt", "A -> B\nB -> A\n");
  CHECK_THROWS_AS(read_dag(s.path("cycle.txt")), IoError);
  s.put("dup.txt", "A -- B\nA -- B\n");
  CHECK_THROWS_AS(read_ugraph(s.path("dup.txt")), IoError);
}

TEST_CASE("dot output names both graph kinds") {
  Dag d({"A", "B"}, {{0, 1}});
  std::string dot = to_dot(d);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("\"A\" -> \"B\"") != std::string::npos);
  UGraph g({"A", "B"}, {{0, 1}});
  std::string udot = to_dot(g);
  CHECK(udot.find("graph") != std::string::npos);
  CHECK(udot.find("\"A\" -- \"B\"") != std::string::npos);
}

TEST_CASE("atomic writes land complete and leave no temporaries") {
  Scratch s;
  atomic_write_text(s.path("out.txt"), "first\n");
  CHECK(read_text_file(s.path("out.txt")) == "first\n");
  atomic_write_text(s.path("out.txt"), "second\n");
  CHECK(read_text_file(s.path("out.txt")) == "second\n");
  int entries = 0;
  for (const auto& entry : fs::directory_iterator(s.dir)) {
    ++entries;
    CHECK(entry.path().filename().string() == "out.txt");
  }
  CHECK(entries == 1);
}

TEST_CASE("read_text_file reports missing files") {
  Scratch s;
  CHECK_THROWS_AS(read_text_file(s.path("absent.txt")), IoError);
}

TEST_CASE("glob expansion is sorted and validated") {
  Scratch s;
  s.put("data_02.csv", "1\n");
  s.put("data_01.csv", "1\n");
  s.put("data_10.csv", "1\n");
  auto files = expand_glob(s.path("data_*.csv"));
  REQUIRE(files.size() == 3);
  CHECK(files[0] == s.path("data_01.csv"));
  CHECK(files[1] == s.path("data_02.csv"));
  CHECK(files[2] == s.path("data_10.csv"));
  // A plain name must exist.
  CHECK(expand_glob(s.path("data_01.csv")) == std::vector<std::string>{s.path("data_01.csv")});
  CHECK_THROWS_AS(expand_glob(s.path("nope_*.csv")), IoError);
  CHECK_THROWS_AS(expand_glob(s.path("nope.csv")), IoError);
}

TEST_CASE("double formatting survives a parse round trip") {
  for (double x : {1.0 / 3.0, 1e-300, -2.5e17, 0.1, 123456.789012345678}) {
    std::string text = format_double(x);
    CHECK(std::strtod(text.c_str(), nullptr) == x);
  }
}

}  // TEST_SUITE
