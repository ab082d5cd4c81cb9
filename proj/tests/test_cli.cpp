#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cgbp/cli.hpp"
#include "cgbp/instance_io.hpp"
#include "support.hpp"

using namespace cgbp;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("cgbp_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Runs the installed binary with stdout and stderr discarded.
int run(const std::string& args) {
  const std::string cmd = std::string(CGBP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

nlohmann::json solve_file(const std::string& args, int expected_code, const fs::path& out) {
  fs::remove(out);
  CHECK(run("solve " + args + " --out " + out.string()) == expected_code);
  REQUIRE(fs::exists(out));
  return nlohmann::json::parse(read_file(out));
}

}  // namespace

TEST_CASE("solve_instance on the bundled instances") {
  const Instance cs = load_instance(support::data_path("cs1.json"));
  for (const char* algo : {"bp", "oracle"}) {
    SolveOptions opt;
    opt.algorithm = algo;
    auto [report, code] = solve_instance(cs, opt);
    CHECK(code == kExitSolved);
    CHECK(report["status"] == "optimal");
    CHECK(report["objective"].get<double>() == doctest::Approx(3.0));
    CHECK(report["verified"] == true);
  }
  SolveOptions cg;
  cg.algorithm = "cg";
  std::string trace;
  auto [report, code] = solve_instance(cs, cg, &trace);
  CHECK(code == kExitSolved);
  CHECK(report["lp_value"].get<double>() == doctest::Approx(7.0 / 3.0));
  CHECK(trace.rfind("iteration,lrmp_obj,", 0) == 0);
  SolveOptions bad;
  bad.algorithm = "simplex";
  CHECK_THROWS_AS(solve_instance(cs, bad), InputError);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch();
  const std::string cs1 = support::data_path("cs1.json");

  SUBCASE("solved") {
    const auto r = solve_file("--instance " + cs1, 0, dir / "ok.json");
    CHECK(r["status"] == "optimal");
    for (const char* key : {"status", "objective", "bounds", "iterations", "nodes", "wall_ms",
                            "termination", "verified", "solution"}) {
      CHECK(r.contains(key));
    }
  }
  SUBCASE("input errors") {
    const fs::path bad = dir / "bad.json";
    write_file(bad, "{\"type\": \"cutting_stock\", \"roll_width\": 10,,}");
    fs::remove(dir / "none.json");
    CHECK(run("solve --instance " + bad.string() + " --out " + (dir / "none.json").string()) == 1);
    CHECK_FALSE(fs::exists(dir / "none.json"));
    CHECK(run("solve --instance " + (dir / "missing.json").string()) == 1);
    CHECK(run("solve --instance " + cs1 + " --beam-width 0") == 1);
    CHECK(run("solve --instance " + cs1 + " --algorithm nope") == 1);
    CHECK(run("frobnicate") == 1);
    const fs::path schema = dir / "schema.json";
    write_file(schema, R"({"type": "cutting_stock", "roll_width": 5, "items": [{"size": 6, "demand": 1}]})");
    CHECK(run("solve --instance " + schema.string()) == 1);
  }
  SUBCASE("infeasible") {
    const fs::path inst = dir / "infeasible.json";
    write_file(inst, dump_instance(Instance(NetPathInstance{2, {{0, 1, 1.0, 1}},
                                                            {{0, 1, 1, -1}, {0, 1, 1, -1}}})));
    for (const char* algo : {"cg", "bp", "oracle"}) {
      CAPTURE(algo);
      const auto r = solve_file("--instance " + inst.string() + " --algorithm " + algo, 2,
                                dir / "inf.json");
      CHECK(r["status"] == "infeasible");
    }
  }
  SUBCASE("limit") {
    const auto r = solve_file("--instance " + cs1 + " --algorithm cg --max-iters 1", 3,
                              dir / "limit.json");
    CHECK(r["status"] == "limit");
  }
  fs::remove_all(dir);
}

TEST_CASE("gen is deterministic") {
  const fs::path dir = scratch();
  const std::string a = (dir / "a.json").string();
  const std::string b = (dir / "b.json").string();
  const std::string c = (dir / "c.json").string();
  for (const std::string kind : {"cutting_stock", "net_path"}) {
    CHECK(run("gen --kind " + kind + " --seed 11 --out " + a) == 0);
    CHECK(run("gen --kind " + kind + " --seed 11 --out " + b) == 0);
    CHECK(run("gen --kind " + kind + " --seed 12 --out " + c) == 0);
    CHECK(read_file(a) == read_file(b));
    CHECK(read_file(a) != read_file(c));
    CHECK_NOTHROW(load_instance(a));
  }
  CHECK(run("gen --kind cutting_stock --min-size 9 --max-size 4 --out " + a) == 1);
  CHECK(run("gen --kind bin_packing") == 1);
  GenOptions g;
  g.kind = "cutting_stock";
  g.seed = 3;
  g.out = a;
  CHECK(cmd_gen(g) == 0);
  CHECK(load_instance(a).index() == 0);
  fs::remove_all(dir);
}

TEST_CASE("reports are deterministic apart from timing") {
  const fs::path dir = scratch();
  const std::string np1 = support::data_path("np1.json");
  const fs::path trace = dir / "trace.csv";
  auto strip = [](nlohmann::json r) {
    r.erase("wall_ms");
    return r;
  };
  const auto a = solve_file("--instance " + np1 + " --seed 4 --trace " + trace.string(), 0,
                            dir / "r1.json");
  const std::string trace_a = read_file(trace);
  const auto b = solve_file("--instance " + np1 + " --seed 4 --trace " + trace.string(), 0,
                            dir / "r2.json");
  CHECK(strip(a) == strip(b));
  CHECK(a["seed"] == 4);
  CHECK(trace_a.rfind("node,ub,lb,wall_ms\n", 0) == 0);
  // Strategy and beam options reach the solver.
  const auto dfs = solve_file("--instance " + np1 + " --node-strategy dfs --beam-width 1", 0,
                              dir / "r3.json");
  CHECK(dfs["verified"] == true);
  CHECK(dfs["objective"].get<double>() >= a["objective"].get<double>() - 1e-9);
  fs::remove_all(dir);
}

TEST_CASE("run_cli help exits cleanly") {
  char prog[] = "cgbp";
  char help[] = "--help";
  char* argv[] = {prog, help};
  CHECK(run_cli(2, argv) == 0);
}
