#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sparsez/cli.hpp"

using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;

  json report() const { return json::parse(out); }
  json error() const { return json::parse(err); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = sparsez::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json stripped(json report) {
  report.erase("envelope");
  return report;
}

std::vector<std::string> strings(const json& j) { return j.get<std::vector<std::string>>(); }

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("sparsez-cli-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("monoid listing") {
  const auto r = run({"monoid", "--gens", "2,3", "--bound", "20", "--format", "json"});
  REQUIRE(r.code == sparsez::cli::kExitOk);
  const auto j = r.report();
  CHECK(j["command"] == "monoid");
  CHECK(strings(j["result"]["elements"]) ==
        std::vector<std::string>{"1", "2", "3", "4", "6", "8", "9", "12", "16", "18"});
  CHECK(j["input"]["bound"] == "20");
  CHECK(j.contains("budgets"));
  CHECK(j["envelope"].contains("elapsed_ms"));
}

TEST_CASE("global options go before or after the subcommand") {
  const auto a = run({"--format", "json", "monoid", "--gens", "2", "--bound", "8"});
  const auto b = run({"monoid", "--gens", "2", "--bound", "8", "--format", "json"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(stripped(a.report()) == stripped(b.report()));
}

TEST_CASE("aq identities exit cleanly") {
  const auto r = run({"aq", "verify", "--q", "2", "--n", "2000"});
  CHECK(r.code == sparsez::cli::kExitOk);
  CHECK(r.report()["result"]["passed"] == true);
}

TEST_CASE("epsilon constants") {
  const auto r = run({"epsilon", "--lambda", "pow:2", "--k", "3", "--n", "30"});
  REQUIRE(r.code == 0);
  const auto entries = r.report()["result"]["entries"];
  REQUIRE(entries.size() == 3);
  CHECK(entries[2]["value"]["exact"] == "1/4");
  CHECK(entries[1]["value"]["exact"] == "1/2");
  CHECK(entries[0]["value"]["exact"] == "1");
}

TEST_CASE("errors are JSON objects with an exit code") {
  SUBCASE("contract errors") {
    const auto r = run({"monoid", "--gens", "3,2", "--bound", "20"});
    CHECK(r.code == sparsez::cli::kExitContract);
    CHECK(r.out.empty());
    const auto e = r.error()["error"];
    CHECK(e["code"] == "InvalidSpec");
    CHECK(e["exit_code"] == 2);
    CHECK(e["message"].get<std::string>().find("increasing") != std::string::npos);
  }
  SUBCASE("usage errors") {
    CHECK(run({"monoid", "--gens", "2"}).code == sparsez::cli::kExitContract);
    CHECK(run({"no-such-command"}).code == sparsez::cli::kExitContract);
    CHECK(run({"monoid", "--gens", "2", "--bound", "ten"}).code == sparsez::cli::kExitContract);
  }
  SUBCASE("resource errors") {
    const auto r = run({"--max-elements", "5", "monoid", "--gens", "2,3", "--bound", "1000000"});
    CHECK(r.code == sparsez::cli::kExitResource);
    CHECK(r.error()["error"]["code"] == "BudgetExceeded");
  }
  SUBCASE("negative certificates") {
    // A margin this wide drops base points, so the larger box finds misses.
    const auto r = run({"verify-orbits", "--gens", "2,3", "--signs", "++-", "--box", "8",
                        "--margin", "7", "--verify-box", "10"});
    CHECK(r.code == sparsez::cli::kExitCheckFailed);
    CHECK(r.report()["result"]["discrepancy_kind"] == "missed");
  }
}

TEST_CASE("help") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("monoid") != std::string::npos);
  CHECK(r.out.find("CSV") != std::string::npos);
}

TEST_CASE("csv output") {
  const auto r = run({"materialize", "--aq", "2", "--bound", "40", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "value\n1\n3\n6\n11\n20\n37\n");

  const auto d = run({"density", "--gens", "2", "--bound", "100", "--checkpoints", "10,100",
                      "--format", "csv"});
  REQUIRE(d.code == 0);
  CHECK(d.out.rfind("m,", 0) == 0);

  const auto none = run({"independent", "--gens", "2,3", "--format", "csv"});
  CHECK(none.code == sparsez::cli::kExitContract);
  CHECK(run({"monoid", "--gens", "2", "--bound", "8", "--format", "xml"}).code ==
        sparsez::cli::kExitContract);
}

TEST_CASE("reports are deterministic apart from the envelope") {
  const std::vector<std::vector<std::string>> commands{
      {"sumset", "--gens", "2,3", "--source-bound", "1000", "--n", "2", "--range", "50"},
      {"profile", "--gens", "2,3", "--bound", "10000", "--k", "2", "--max-target", "20"},
      {"orbits", "--gens", "2,3", "--signs", "++-", "--box", "8"},
      {"ratio-gap", "--lambda", "pow:pi", "--n", "10"},
      {"reduce", "--gens", "2,4,3"},
  };
  for (const auto& c : commands) {
    const auto a = run(c);
    const auto b = run(c);
    REQUIRE(a.code == 0);
    CHECK(stripped(a.report()).dump() == stripped(b.report()).dump());
  }
}

TEST_CASE("specs from files") {
  TempDir dir;
  const auto spec_path = (dir.path / "spec.json").string();
  std::ofstream(spec_path) << R"({"kind": "monoid", "generators": ["2", "3"]})";
  const auto from_file = run({"materialize", "--spec", spec_path, "--bound", "20"});
  const auto inline_gens = run({"materialize", "--gens", "2,3", "--bound", "20"});
  REQUIRE(from_file.code == 0);
  REQUIRE(inline_gens.code == 0);
  CHECK(from_file.report()["result"] == inline_gens.report()["result"]);

  const auto lambda_path = (dir.path / "lambda.json").string();
  std::ofstream(lambda_path) << R"({"kind": "recursive", "constants": {"t": "pi"},
                                    "taus": ["t"], "steps": [{"multiplier": "2", "tau": "0"}]})";
  const auto eval = run({"lambda-eval", "--spec", lambda_path, "--n", "0", "--count", "3"});
  REQUIRE(eval.code == 0);
  const auto dumped = eval.report()["result"].dump();
  CHECK(dumped.find("\"19\"") != std::string::npos);
  CHECK(dumped.find("\"124\"") != std::string::npos);

  CHECK(run({"materialize", "--spec", (dir.path / "missing.json").string(), "--bound", "5"}).code ==
        sparsez::cli::kExitContract);
}

TEST_CASE("cache directory from the environment") {
  TempDir dir;
  ::setenv("SPARSE_Z_CACHE", dir.path.c_str(), 1);
  const std::vector<std::string> args{"materialize", "--gens", "2,3", "--bound", "1000"};
  const auto first = run(args);
  const auto second = run(args);
  ::unsetenv("SPARSE_Z_CACHE");
  REQUIRE(first.code == 0);
  REQUIRE(second.code == 0);
  CHECK(first.report()["envelope"]["cache"] == "stored");
  CHECK(second.report()["envelope"]["cache"] == "hit");
  CHECK(first.report()["result"] == second.report()["result"]);
  CHECK(run(args).report()["envelope"]["cache"] == "off");
}

TEST_CASE("dossiers") {
  SUBCASE("sparsity on a monoid") {
    const auto r = run({"dossier", "--gens", "2,3", "--profile", "sparsity"});
    REQUIRE(r.code == 0);
    const auto steps = r.report()["result"]["steps"];
    std::vector<std::string> names;
    for (const auto& s : steps) {
      names.push_back(s["step"]);
      CHECK(s["passed"] == true);
      if (!s["stabilized"].is_null()) CHECK(s["stabilized"] == true);
    }
    CHECK(std::find(names.begin(), names.end(), "sumset") != names.end());
    CHECK(std::find(names.begin(), names.end(), "ap") != names.end());
    CHECK(std::find(names.begin(), names.end(), "profile") != names.end());
  }
  SUBCASE("aq pipeline") {
    const auto r = run({"dossier", "--aq", "2", "--profile", "aq"});
    REQUIRE(r.code == 0);
    std::vector<std::string> names;
    const auto report = r.report();
    for (const auto& s : report["result"]["steps"]) names.push_back(s["step"]);
    CHECK(names == std::vector<std::string>{"identity", "coverage", "context", "g_bound",
                                            "density", "witnesses"});
  }
  SUBCASE("independent pipeline") {
    const auto r = run({"dossier", "--lambda", "pow:pi", "--perturb", "0,1", "--independent",
                        "--profile", "independent"});
    REQUIRE(r.code == 0);
    const auto rep = r.report();
    CHECK(rep["result"]["passed"] == true);
    CHECK(rep["envelope"].contains("steps_ms"));
  }
  SUBCASE("profile mismatch") {
    const auto r = run({"dossier", "--gens", "2,3", "--profile", "aq"});
    CHECK(r.code == sparsez::cli::kExitContract);
  }
}
