#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "steadyscan/cli.hpp"
#include "steadyscan/iron_model.hpp"
#include "steadyscan/propagate.hpp"
#include "steadyscan/sampler.hpp"

using namespace steadyscan;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "steadyscan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("steadyscan_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kToy = R"(modelfile v1
name toy
option target 2
unknown x in [0, 1]
unknown y in [0, 1]
constraint sum: x + y < 1.5
)";

}  // namespace

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  SUBCASE("inconsistent model stops with the conflict report") {
    const Run r = cli({"pipeline", "fixtures/pre_revision.model", "--seed", "1", "--out-dir", dir.string()});
    CHECK(r.code == kExitInconsistent);
    CHECK(r.out.find("ire5_transcription (reliability=low)") != std::string::npos);
    const auto report = nlohmann::json::parse(slurp(dir / "conflicts.json"));
    CHECK(report["consistent"] == false);
    CHECK_FALSE(fs::exists(dir / "solutions.jsonl"));
  }
  SUBCASE("usage") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"sample", "iron", "--out-dir", dir.string()}).code == kExitUsage);  // no seed
    CHECK(cli({"sample", "iron", "--seed", "x"}).code == kExitUsage);
    CHECK(cli({"contract", (dir / "missing.model").string()}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }
  SUBCASE("parse errors") {
    std::ofstream(dir / "bad.model") << "modelfile v1\nunknown x in [0, 1]\nconstraint c: x > \n";
    const Run r = cli({"contract", (dir / "bad.model").string()});
    CHECK(r.code == kExitParse);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("budget") {
    const Run r = cli({"sample", "iron", "--seed", "3", "--target", "50", "--budget", "5", "--out-dir", dir.string()});
    CHECK(r.code == kExitBudget);
    const auto stats = nlohmann::json::parse(slurp(dir / "stats.json"));
    CHECK(stats["budget_exhausted"] == true);
  }
}

TEST_CASE("settings precedence") {
  const fs::path dir = scratch("precedence");
  std::ofstream(dir / "toy.model") << kToy;
  const std::string model = (dir / "toy.model").string();
  auto count = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"sample", model, "--seed", "5", "--out-dir", dir.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(cli(args).code == kExitOk);
    std::ifstream is(dir / "solutions.jsonl");
    std::size_t n = 0;
    for (std::string line; std::getline(is, line);) n += line.empty() ? 0 : 1;
    return n;
  };
  CHECK(count({}) == 2);  // model option
  setenv("STEADYSCAN_TARGET", "3", 1);
  CHECK(count({}) == 3);
  CHECK(count({"--target", "4"}) == 4);
  unsetenv("STEADYSCAN_TARGET");
  setenv("STEADYSCAN_TARGET", "three", 1);
  CHECK(cli({"sample", model, "--seed", "5", "--out-dir", dir.string()}).code == kExitUsage);
  unsetenv("STEADYSCAN_TARGET");
}

TEST_CASE("reproducible solutions files") {
  const fs::path a = scratch("repro_a");
  const fs::path b = scratch("repro_b");
  const fs::path c = scratch("repro_c");
  REQUIRE(cli({"sample", "iron", "--seed", "11", "--target", "40", "--out-dir", a.string()}).code == kExitOk);
  REQUIRE(cli({"sample", "iron", "--seed", "11", "--target", "40", "--out-dir", b.string()}).code == kExitOk);
  REQUIRE(cli({"sample", "iron", "--seed", "11", "--target", "40", "--jobs", "3", "--out-dir", c.string()}).code ==
          kExitOk);
  const std::string first = slurp(a / "solutions.jsonl");
  CHECK_FALSE(first.empty());
  CHECK(first == slurp(b / "solutions.jsonl"));
  CHECK(first == slurp(c / "solutions.jsonl"));
  REQUIRE(cli({"sample", "iron", "--seed", "12", "--target", "40", "--out-dir", b.string()}).code == kExitOk);
  CHECK(first != slurp(b / "solutions.jsonl"));
}

TEST_CASE("artifacts compose between subcommands") {
  const fs::path dir = scratch("compose");
  const Model iron = builtin_iron_model();
  const std::string boxes = (dir / "custom" / "paving.jsonl").string();
  REQUIRE(cli({"pave", "iron", "--max-boxes", "64", "--boxes", boxes}).code == kExitOk);
  std::ifstream bs(boxes);
  const BoxUnion u = read_jsonl(bs, iron.space());
  CHECK(u.size() == 64);

  const std::string sols = (dir / "s.jsonl").string();
  REQUIRE(cli({"sample", "iron", "--seed", "2", "--target", "5", "--from-boxes", boxes, "--solutions", sols, "--stats",
               (dir / "st.json").string()})
              .code == kExitOk);
  std::ifstream ss(sols);
  const auto read = read_solutions(ss, iron);
  REQUIRE(read.size() == 5);
  for (const auto& s : read) {
    bool inside = false;
    for (const auto& b : u.boxes) {
      bool all = true;
      for (int p : iron.parameters()) all &= b[static_cast<std::size_t>(p)].contains(s.assignment.value(p));
      inside |= all;
    }
    CHECK(inside);
  }

  const std::string csv = (dir / "t.csv").string();
  const Run sim = cli({"simulate", "iron", "--from-solutions", sols, "--index", "2", "--csv", csv, "--json",
                       (dir / "t.json").string(), "--svg", (dir / "t.svg").string()});
  REQUIRE(sim.code == kExitOk);
  CHECK(sim.out.find("event cutoff") != std::string::npos);
  CHECK(slurp(dir / "t.svg").rfind("<svg", 0) == 0);

  const Run ok = cli({"check", "--trace", csv, "--model", "iron", "--from-solutions", sols, "--index", "2"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.rfind("satisfied robustness=", 0) == 0);
  std::ofstream(dir / "fall.stl") << "# iron falls within a day\neventually[0, 86400] (Fe < 0.99*Fe0)\n";
  const Run file = cli({"check", "--trace", (dir / "t.json").string(), "--stl", (dir / "fall.stl").string(), "--const",
                        "Fe0=" + std::to_string(read[2].assignment.at("Fe_eq"))});
  CHECK(file.code == kExitOk);
  const Run bad = cli({"check", "--trace", csv, "--formula", "always[0, 100] Fe > 1"});
  CHECK(bad.code == kExitViolated);
  CHECK(bad.out.rfind("violated", 0) == 0);
  CHECK(cli({"check", "--trace", csv, "--formula", "always[0, 100] Zn > 1"}).code == kExitParse);
}

TEST_CASE("pipeline on the shipped model") {
  const fs::path dir = scratch("pipeline");
  const Run r = cli({"pipeline", "iron", "--seed", "7", "--target", "30", "--dynamics", "10", "--out-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"contracted.jsonl", "boxes.jsonl", "solutions.jsonl", "stats.json", "dynamics.jsonl",
                        "trace.csv", "trace.json", "trace.svg"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  std::ifstream dyn(dir / "dynamics.jsonl");
  std::size_t n = 0;
  for (std::string line; std::getline(dyn, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("stability"));
    CHECK(j.contains("satisfied"));
  }
  CHECK(n == 10);
}
