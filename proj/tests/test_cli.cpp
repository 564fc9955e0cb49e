#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "hurricane/serialization.hpp"

namespace fs = std::filesystem;
using hurricane::Json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = hurricane::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

int count_lines(const std::string& s, const std::string& prefix = "") {
  std::istringstream in(s);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("ops dump") {
  const auto r = run({"ops", "dump", "--h-in", "28", "--w-in", "28", "--c-in", "160", "--c-out", "160"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  REQUIRE(j.size() == 32);
  for (const auto& op : j) {
    for (const char* key : {"id", "family", "kernel", "expansion", "se", "flops", "params", "mem_bytes"}) {
      CHECK(op.contains(key));
    }
  }
  CHECK(j[0]["id"] == "SEP_3");
  CHECK(j[0]["expansion"].is_null());

  const auto layer = Json::parse(run({"ops", "dump", "--layer", "5"}).out);
  const auto explicit_ctx =
      Json::parse(run({"ops", "dump", "--h-in", "56", "--w-in", "56", "--c-in", "64", "--c-out", "160", "--stride", "2"}).out);
  CHECK(layer == explicit_ctx);

  CHECK(run({"ops", "dump", "--stride", "3"}).code == 1);
}

TEST_CASE("usage errors exit 2 and runtime errors exit 1") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"gen-space", "--out", "x.json"}).code == 2);
  CHECK(run({"--help"}).code == 0);

  const auto missing = run({"gen-space", "--profile", "/nonexistent/p.csv", "--out", "x.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error: ", 0) == 0);

  const auto json = run({"--json-errors", "gen-space", "--profile", "/nonexistent/p.csv", "--out", "x.json"});
  CHECK(json.code == 1);
  const auto e = Json::parse(json.err);
  CHECK(e["error"] == "Io");
  CHECK(e.contains("message"));
}

TEST_CASE("full pipeline") {
  TempDir dir("hurricane_cli_pipeline");
  REQUIRE(run({"fixtures", "gen-profile", "--kind", "dsp", "--seed", "3", "--out", dir / "p.csv"}).code == 0);
  CHECK(fs::exists(dir / "p.csv.manifest.json"));
  CHECK(count_lines(slurp(dir / "p.csv")) == 641);

  REQUIRE(run({"gen-space", "--profile", dir / "p.csv", "--out", dir / "s.json"}).code == 0);
  const auto space = hurricane::read_json_file(dir / "s.json");
  CHECK(space["layers"].size() == 20);
  CHECK(space["manifest"]["command"] == "gen-space");

  const auto fit = run({"fit-predictor", "--space", dir / "s.json", "--profile", dir / "p.csv", "--perturb", "0.03",
                        "--out", dir / "m.json"});
  REQUIRE(fit.code == 0);
  const auto model = hurricane::read_json_file(dir / "m.json");
  CHECK(model["metrics"]["test_mape"].get<double>() <= 5.0);
  CHECK(model["weight_mean"].size() == 85);

  const auto search = run({"search", "--space", dir / "s.json", "--constraint-ms", "17", "--latency",
                           "predictor:" + dir / "m.json", "--profile", dir / "p.csv", "--evaluator", "synth:seed=7",
                           "--two-stage", "--t", "8", "--budget", "300", "--seed", "1", "--report", dir / "r.json"});
  REQUIRE(search.code == 0);
  const auto report = hurricane::read_json_file(dir / "r.json");
  CHECK(report["mode"] == "two-stage");
  CHECK(report["best_latency"].get<double>() <= 17.0);
  CHECK(report.contains("audit_latency"));
  CHECK(report["stages"].size() == 2);
  CHECK(report["manifest"]["inputs"].size() == 3);

  const auto text = run({"report", "--in", dir / "r.json"});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("two-stage") != std::string::npos);

  const auto md = run({"report", "--in", dir / "r.json", "--format", "markdown"});
  REQUIRE(md.code == 0);
  // Architecture table rows are "| <layer> | <operator id> |".
  int arch_rows = 0;
  {
    std::istringstream in(md.out);
    std::string line;
    bool inside = false;
    while (std::getline(in, line)) {
      if (line == "## Architecture") inside = true;
      else if (line.rfind("## ", 0) == 0) inside = false;
      else if (inside && line.rfind("| ", 0) == 0 && line.find("layer") == std::string::npos) ++arch_rows;
    }
  }
  CHECK(arch_rows == 20);

  const auto csv = run({"report", "--in", dir / "r.json", "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(count_lines(csv.out) == 1 + static_cast<int>(report["history"].size()));
  CHECK(csv.out.rfind("stage,iteration,best_accuracy", 0) == 0);

  CHECK(run({"report", "--in", dir / "r.json", "--format", "pdf"}).code == 1);
}

TEST_CASE("end-to-end dataset ingestion") {
  TempDir dir("hurricane_cli_dataset");
  REQUIRE(run({"fixtures", "gen-profile", "--kind", "vpu", "--out", dir / "p.csv"}).code == 0);
  REQUIRE(run({"gen-space", "--profile", dir / "p.csv", "--out", dir / "s.json"}).code == 0);
  REQUIRE(run({"fixtures", "gen-dataset", "--space", dir / "s.json", "--profile", dir / "p.csv", "--n", "300",
               "--perturb", "0.03", "--out-dir", dir / "data"})
              .code == 0);
  CHECK(slurp(dir / "data/dataset.csv").rfind("arch_json_path,latency_ms\n", 0) == 0);
  const auto fit = run({"fit-predictor", "--space", dir / "s.json", "--dataset", dir / "data/dataset.csv",
                        "--n-train", "200", "--n-test", "100", "--out", dir / "m.json"});
  REQUIRE(fit.code == 0);
  const auto model = hurricane::read_json_file(dir / "m.json");
  CHECK(model["metrics"]["n_train"] == 200);
  CHECK(model["metrics"]["n_test"] == 100);
  CHECK(model["metrics"]["test_mape"].get<double>() <= 5.0);
}

TEST_CASE("config files supply defaults; the command line wins") {
  TempDir dir("hurricane_cli_config");
  REQUIRE(run({"fixtures", "gen-profile", "--kind", "cpu", "--out", dir / "p.csv"}).code == 0);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"profile": ")" << dir / "p.csv" << R"(", "p": 2, "explore-last": 0, "out": ")" << dir / "a.json"
        << R"("})";
  }
  REQUIRE(run({"gen-space", "--config", dir / "cfg.json"}).code == 0);
  const auto a = hurricane::read_json_file(dir / "a.json");
  for (const auto& layer : a["layers"]) CHECK(layer["candidates"].size() == 2);

  REQUIRE(run({"gen-space", "--config", dir / "cfg.json", "--p", "3", "--out", dir / "b.json"}).code == 0);
  const auto b = hurricane::read_json_file(dir / "b.json");
  for (const auto& layer : b["layers"]) CHECK(layer["candidates"].size() == 3);
}

TEST_CASE("pinned timestamps make artifacts byte-identical") {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto cwd = fs::current_path();
  TempDir a("hurricane_cli_det_a"), b("hurricane_cli_det_b");
  for (const auto* dir : {&a, &b}) {
    fs::current_path(dir->path);
    REQUIRE(run({"fixtures", "gen-profile", "--kind", "cpu", "--seed", "5", "--out", "p.csv"}).code == 0);
    REQUIRE(run({"gen-space", "--profile", "p.csv", "--out", "s.json"}).code == 0);
    REQUIRE(run({"fit-predictor", "--space", "s.json", "--profile", "p.csv", "--out", "m.json"}).code == 0);
    REQUIRE(run({"search", "--space", "s.json", "--constraint-ms", "310", "--profile", "p.csv", "--two-stage",
                 "--budget", "200", "--report", "r.json"})
                .code == 0);
  }
  fs::current_path(cwd);
  for (const char* f : {"p.csv", "p.csv.manifest.json", "s.json", "m.json", "r.json"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  for (const char* f : {"s.json", "m.json", "r.json"}) {
    const auto doc = hurricane::read_json_file(a / f);
    CHECK(doc["manifest"]["manifest_hash"] == hurricane::cli::manifest_hash(doc));
    CHECK(doc["manifest"]["created_at"] == "2023-11-14T22:13:20Z");
  }
  ::unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("manifest hash ignores the timestamp only") {
  Json doc{{"x", 1}, {"manifest", {{"command", "c"}, {"created_at", "2020"}, {"manifest_hash", "ab"}}}};
  auto later = doc;
  later["manifest"]["created_at"] = "2030";
  CHECK(hurricane::cli::manifest_hash(doc) == hurricane::cli::manifest_hash(later));
  later["x"] = 2;
  CHECK(hurricane::cli::manifest_hash(doc) != hurricane::cli::manifest_hash(later));
}

TEST_CASE("verify") {
  const auto r = run({"verify"});
  CHECK(r.code == 0);
  CHECK(r.out.find("pool=32 PASS") != std::string::npos);
  CHECK(r.out.find("size=2684354560000 PASS") != std::string::npos);
  CHECK(r.out.find("reduction(t=8)") != std::string::npos);
  CHECK(count_lines(r.out) == 3);
}
