#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "../tools/cli.hpp"
#include "sceval/io.hpp"
#include "sceval/report.hpp"

using namespace sceval;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sceval_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("sceval_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<MetricCell> load_report(const std::string& path) {
  std::ifstream in(path);
  return io::read_machine_report(in, path);
}

std::size_t count_tag(const std::string& tag_file, Tag tag) {
  std::ifstream in(tag_file);
  std::size_t n = 0;
  for (const auto& r : io::read_tags(in)) n += r.tags.contains(tag);
  return n;
}

}  // namespace

TEST_CASE("bad arguments exit with 2") {
  CHECK(sceval_run({}).code == cli::kExitBadInput);
  CHECK(sceval_run({"frobnicate"}).code == cli::kExitBadInput);
  CHECK(sceval_run({"tag", "--scenes", "/nonexistent/x.jsonl", "--out", "-"}).code ==
        cli::kExitBadInput);
  CHECK(sceval_run({"synth", "--out", "-", "--pattern", "T3,T5:4"}).err.find("unsatisfiable") !=
        std::string::npos);
  CHECK(sceval_run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("empty scene file") {
  TempDir d;
  std::ofstream(d / "empty.jsonl").close();
  const Result r = sceval_run({"tag", "--scenes", d / "empty.jsonl", "--out", d / "t.jsonl"});
  CHECK(r.code == cli::kExitBadInput);
  CHECK(r.err.find("no scenes") != std::string::npos);
}

TEST_CASE("malformed scene: strict fails, lenient skips") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "3", "--tracks-per-scene", "2"}).code == 0);
  {
    std::ofstream(d / "s.jsonl", std::ios::app) << "{\"scene_id\":\"bad\"}\n";
  }
  CHECK(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl"}).code == cli::kExitBadInput);
  const Result r = sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl", "--lenient"});
  CHECK(r.code == 0);
  CHECK(r.err.find("skipped") != std::string::npos);
  CHECK(r.out.find("tracks: 6") != std::string::npos);
}

TEST_CASE("a looser still threshold never yields fewer still tracks") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "20", "--seed", "3"}).code == 0);
  std::ofstream(d / "p.txt") << "still_speed_max = 0.1\n";
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "a.jsonl"}).code == 0);
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "b.jsonl", "--params", d / "p.txt"}).code == 0);
  CHECK(count_tag(d / "b.jsonl", Tag::Still) >= count_tag(d / "a.jsonl", Tag::Still));
  CHECK(count_tag(d / "b.jsonl", Tag::Still) > count_tag(d / "a.jsonl", Tag::Still));
}

TEST_CASE("constant-velocity pipeline scores zero") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "10", "--constant-velocity"}).code == 0);
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl"}).code == 0);
  REQUIRE(sceval_run({"predict-cv", "--scenes", d / "s.jsonl", "--out", d / "p.jsonl"}).code == 0);
  const Result r = sceval_run({"evaluate", "--scenes", d / "s.jsonl", "--predictions", d / "p.jsonl",
                               "--tags", d / "t.jsonl", "--out", d / "m.csv"});
  REQUIRE(r.code == 0);
  const auto cells = load_report(d / "m.csv");
  REQUIRE_FALSE(cells.empty());
  for (const MetricCell& c : cells) {
    CHECK(std::abs(c.mean) <= 1e-9);
    CHECK(std::abs(c.max) <= 1e-9);
  }
  const Result h = sceval_run({"report", "--metrics", d / "m.csv", "--group-by", "horizon"});
  CHECK(h.code == 0);
  CHECK(h.out.find("7.6 s mean") != std::string::npos);
  CHECK(sceval_run({"report", "--metrics", d / "m.csv", "--group-by", "weather"}).code == cli::kExitBadInput);
  const Result m = sceval_run({"report", "--metrics", d / "m.csv", "--format", "machine"});
  CHECK(m.out.rfind(std::string(io::kReportHeader), 0) == 0);
}

TEST_CASE("two models evaluate independently") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "8"}).code == 0);
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl"}).code == 0);
  REQUIRE(sceval_run({"predict-cv", "--scenes", d / "s.jsonl", "--out", d / "a.jsonl", "--model", "A"}).code == 0);
  REQUIRE(sceval_run({"predict-cv", "--scenes", d / "s.jsonl", "--out", d / "b.jsonl", "--model", "B"}).code == 0);
  REQUIRE(sceval_run({"evaluate", "--scenes", d / "s.jsonl", "--predictions", d / "a.jsonl", d / "b.jsonl",
                      "--tags", d / "t.jsonl", "--out", d / "m.csv"}).code == 0);
  std::map<std::string, std::vector<MetricCell>> by_model;
  for (const MetricCell& c : load_report(d / "m.csv")) by_model[c.key.model].push_back(c);
  REQUIRE(by_model.size() == 2);
  const auto& a = by_model["A"];
  const auto& b = by_model["B"];
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].count == b[i].count);
    CHECK(a[i].mean == b[i].mean);
  }
}

TEST_CASE("ttp-only with no TTP tracks") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "2", "--pattern", "T11:5"}).code == 0);
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl"}).code == 0);
  REQUIRE(sceval_run({"predict-cv", "--scenes", d / "s.jsonl", "--out", d / "p.jsonl"}).code == 0);
  const Result r = sceval_run({"evaluate", "--scenes", d / "s.jsonl", "--predictions", d / "p.jsonl",
                               "--tags", d / "t.jsonl", "--out", d / "m.csv", "--ttp-only"});
  CHECK(r.code == 0);
  CHECK(r.err.find("no TTP tracks") != std::string::npos);
  CHECK(load_report(d / "m.csv").empty());
}

TEST_CASE("predictions for unknown scenes are rejected") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "2", "--seed", "1"}).code == 0);
  REQUIRE(sceval_run({"synth", "--out", d / "o.jsonl", "--scenes", "2", "--seed", "2"}).code == 0);
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl"}).code == 0);
  REQUIRE(sceval_run({"predict-cv", "--scenes", d / "o.jsonl", "--out", d / "p.jsonl"}).code == 0);
  const Result r = sceval_run({"evaluate", "--scenes", d / "s.jsonl", "--predictions", d / "p.jsonl",
                               "--tags", d / "t.jsonl", "--out", d / "m.csv"});
  CHECK(r.code == cli::kExitBadInput);
  CHECK(r.err.find("synth-2-0") != std::string::npos);
}

TEST_CASE("grid mismatch between prediction file and evaluation") {
  TempDir d;
  REQUIRE(sceval_run({"synth", "--out", d / "s.jsonl", "--scenes", "1"}).code == 0);
  REQUIRE(sceval_run({"tag", "--scenes", d / "s.jsonl", "--out", d / "t.jsonl"}).code == 0);
  REQUIRE(sceval_run({"predict-cv", "--scenes", d / "s.jsonl", "--out", d / "p.jsonl", "--grid", "1,2,3"}).code == 0);
  CHECK(sceval_run({"evaluate", "--scenes", d / "s.jsonl", "--predictions", d / "p.jsonl", "--tags",
                    d / "t.jsonl", "--out", d / "m.csv"}).code == cli::kExitBadInput);
  CHECK(sceval_run({"evaluate", "--scenes", d / "s.jsonl", "--predictions", d / "p.jsonl", "--tags",
                    d / "t.jsonl", "--out", d / "m.csv", "--grid", "1,2,3"}).code == 0);
}

TEST_CASE("the installed binary reports exit codes") {
  const std::string bin = SCEVAL_BIN;
  CHECK(WEXITSTATUS(std::system((bin + " --help > /dev/null").c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((bin + " report --metrics /nonexistent 2> /dev/null").c_str())) == 2);
}
