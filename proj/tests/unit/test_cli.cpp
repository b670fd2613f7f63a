#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = SPLIT_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("split_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static inline int counter = 0;
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const char* kTriangleProblem = R"({
  "n": 3,
  "quadratic": [[0,1,2.0],[0,2,2.0],[1,2,2.0]],
  "linear": [-2.0,-2.0,-2.0],
  "constraints": [],
  "meta": {"family": "maxcut"}
})";

}  // namespace

TEST_CASE("cli solve on the triangle") {
  TempDir tmp;
  write_text(tmp.file("tri.json"), kTriangleProblem);
  const int rc = run("solve --problem " + tmp.file("tri.json") +
                     " --k 1 --subsolver exhaustive --output " +
                     tmp.file("report.json"));
  REQUIRE(rc == 0);
  const json rep = read_json(tmp.file("report.json"));
  REQUIRE(rep.at("best_cost").get<double>() == -2.0);
  REQUIRE(rep.at("termination").get<std::string>() == "converged");
  REQUIRE(rep.at("cut_value").get<double>() == 2.0);
  REQUIRE(rep.at("feasible").get<bool>());
}

TEST_CASE("cli generator and exact pipeline") {
  TempDir tmp;
  REQUIRE(run("gen-maxcut --n 24 --blobs 3 --std 1.0 --threshold 2.5 --seed 4 "
              "--output " +
              tmp.file("mc.json")) == 0);
  const json problem = read_json(tmp.file("mc.json"));
  REQUIRE(problem.at("n").get<int>() == 24);
  REQUIRE(problem.at("meta").at("family") == "maxcut");

  REQUIRE(run("exact --problem " + tmp.file("mc.json") + " --output " +
              tmp.file("exact.json")) == 0);
  const json exact = read_json(tmp.file("exact.json"));
  REQUIRE(exact.at("status").get<std::string>() == "optimal");

  REQUIRE(run("solve --problem " + tmp.file("mc.json") +
              " --k 3 --seed 4 --output " + tmp.file("rep.json")) == 0);
  const json rep = read_json(tmp.file("rep.json"));
  REQUIRE(rep.at("best_cost").get<double>() >=
          exact.at("cost").get<double>() - 1e-9);
}

TEST_CASE("cli gen-app respects quota") {
  TempDir tmp;
  REQUIRE(run("gen-app --sites 20 --devices 100 --v 10 --radius 25 --box 100 "
              "--seed 5 --output " +
              tmp.file("app.json") + " --instance-output " +
              tmp.file("inst.json")) == 0);
  const json problem = read_json(tmp.file("app.json"));
  REQUIRE(problem.at("n").get<int>() == 20);
  REQUIRE(problem.at("constraints").size() == 1);
  const json inst = read_json(tmp.file("inst.json"));
  REQUIRE(inst.at("sites").size() == 20);

  REQUIRE(run("solve --problem " + tmp.file("app.json") +
              " --k 2 --seed 5 --budget-nodes 20000 --output " +
              tmp.file("rep.json")) == 0);
  const json rep = read_json(tmp.file("rep.json"));
  int ones = 0;
  for (const auto& b : rep.at("best_x")) ones += b.get<int>();
  REQUIRE(ones == 10);
}

TEST_CASE("cli import-gset") {
  TempDir tmp;
  write_text(tmp.file("g.txt"), "4 3\n1 2 1\n2 3 -1\n3 4 1\n");
  REQUIRE(run("import-gset --input " + tmp.file("g.txt") + " --output " +
              tmp.file("g.json")) == 0);
  const json problem = read_json(tmp.file("g.json"));
  REQUIRE(problem.at("n").get<int>() == 4);
  REQUIRE(problem.at("quadratic").size() == 3);

  write_text(tmp.file("bad.txt"), "2 1\n1 1 1\n");
  REQUIRE(run("import-gset --input " + tmp.file("bad.txt") + " --output " +
              tmp.file("bad.json")) == 2);
}

TEST_CASE("cli bench") {
  TempDir tmp;
  const auto dir = tmp.file("instances");
  fs::create_directories(dir);

  SECTION("empty directory gives an empty table") {
    REQUIRE(run("bench --dir " + dir + " --k 1 --csv " + tmp.file("out.csv")) ==
            0);
    std::ifstream in(tmp.file("out.csv"));
    std::string header;
    std::getline(in, header);
    REQUIRE(header == split::benchmark_csv_header());
    std::string rest;
    REQUIRE_FALSE(std::getline(in, rest).good());
  }

  SECTION("split against an exact reference") {
    write_text(dir + "/tri.json", kTriangleProblem);
    REQUIRE(run("bench --dir " + dir + " --method exact --json " +
                tmp.file("ref.json")) == 0);
    REQUIRE(run("bench --dir " + dir +
                " --method split --k 1 --subsolver exhaustive --reference " +
                tmp.file("ref.json") + " --csv " + tmp.file("out.csv") +
                " --json " + tmp.file("out.json")) == 0);
    const json out = read_json(tmp.file("out.json"));
    REQUIRE(out.at("records").size() == 1);
    const json& rec = out.at("records")[0];
    REQUIRE(rec.at("instance") == "tri");
    REQUIRE(rec.at("alpha").get<double>() == 1.0);
    REQUIRE(rec.at("alpha_cut").get<double>() == 1.0);
    REQUIRE(rec.at("cut_value").get<double>() == 2.0);
    REQUIRE(rec.contains("speedup"));
  }
}

TEST_CASE("cli error codes") {
  TempDir tmp;
  SECTION("usage errors") {
    REQUIRE(run("") == 1);
    REQUIRE(run("solve") == 1);
    write_text(tmp.file("tri.json"), kTriangleProblem);
    // --k missing entirely
    REQUIRE(run("solve --problem " + tmp.file("tri.json")) == 1);
  }

  SECTION("missing and malformed files") {
    REQUIRE(run("solve --problem /nonexistent.json --k 1") == 2);
    write_text(tmp.file("broken.json"), "{not json");
    REQUIRE(run("solve --problem " + tmp.file("broken.json") + " --k 1") == 2);
  }

  SECTION("infeasible capacity") {
    write_text(tmp.file("bad.json"), R"({
      "n": 2, "quadratic": [], "linear": [0,0],
      "constraints": [{"kind":"cardinality_eq","support":[0,1],"bound":3}]
    })");
    REQUIRE(run("solve --problem " + tmp.file("bad.json") + " --k 1") == 3);
  }
}
