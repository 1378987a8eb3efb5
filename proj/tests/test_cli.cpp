#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "cennq/cli.hpp"
#include "cennq/dataset.hpp"
#include "cennq/quantizer.hpp"
#include "json.hpp"

using namespace cennq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json json_rows(const Outcome& o) { return nlohmann::json::parse(o.out); }

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "cennq_test_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Dataset plus a small trained template shared by several cases.
struct Fixture {
  fs::path dir = fresh_dir("fixture");
  fs::path manifest;
  fs::path tmpl;
  Fixture() {
    const auto r = cli({"--seed", "4", "--out", (dir / "data").string(), "synth-data", "--size", "12", "--count", "2"});
    REQUIRE(r.code == 0);
    manifest = dir / "data" / "manifest.json";
    tmpl = dir / "template.json";
    const auto t = cli({"--seed", "4", "train", "--manifest", manifest.string(), "--eval-iterations", "5",
                        "--swarm", "4", "--pso-iterations", "4", "--save", tmpl.string()});
    REQUIRE(t.code == 0);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"synth-data"}).code == 1);
  CHECK(cli({"run"}).code == 1);
  CHECK(cli({"--format", "xml", "bench"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("data errors exit with 2") {
  const auto r = cli({"run", "--template", "/nonexistent/t.json", "--input", "/nonexistent/x.pgm"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"project", "--calibration", "/nonexistent/cal.json"}).code == 2);
}

TEST_CASE("synth-data writes a manifest") {
  const auto dir = fresh_dir("synth");
  const auto r = cli({"--seed", "1", "--out", dir.string(), "--format", "json", "synth-data", "--count", "5"});
  REQUIRE(r.code == 0);
  CHECK(read_manifest(dir / "manifest.json").size() == 5);
  const auto rows = json_rows(r);
  CHECK(rows.size() == 5);
  CHECK(rows[0]["differing_pixels"] == 102);
}

TEST_CASE("run with the identity task gives objective 0") {
  const auto dir = fresh_dir("identity");
  SynthOptions o;
  o.noise_level = 0.0;
  o.size = 10;
  o.count = 2;
  const auto manifest = write_dataset(dir, synthesize(o), "id");
  TemplateSet t;
  t.a[4] = 2.0;
  save_template(dir / "id.json", t);
  const auto r = cli({"--format", "json", "run", "--template", (dir / "id.json").string(), "--manifest",
                      manifest.string(), "--iterations", "10"});
  REQUIRE(r.code == 0);
  for (const auto& row : json_rows(r)) CHECK(row["objective"] == 0.0);
  const auto f = cli({"--format", "json", "fixed-run", "--template", (dir / "id.json").string(), "--manifest",
                      manifest.string(), "--shifters", "9"});
  REQUIRE(f.code == 0);
  for (const auto& row : json_rows(f)) {
    CHECK(row["objective"] == 0.0);
    CHECK(row["cycles_per_pixel"] == 1);
  }
}

TEST_CASE("fixed-run rejects non power-of-two templates") {
  const auto& fx = fixture();
  const auto r = cli({"fixed-run", "--template", fx.tmpl.string(), "--manifest", fx.manifest.string()});
  CHECK(r.code == 2);
}

TEST_CASE("quantize with one strategy and one m") {
  const auto& fx = fixture();
  const auto out = fresh_dir("quant1");
  const auto r = cli({"--format", "json", "--out", out.string(), "quantize", "--template", fx.tmpl.string(),
                      "--manifest", fx.manifest.string(), "--strategies", "WNN", "--batches", "C", "--m", "2",
                      "--eval-iterations", "5", "--swarm", "3", "--pso-iterations", "2"});
  REQUIRE(r.code == 0);
  const auto rows = json_rows(r);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0]["label"] == "WNN-C");
  CHECK(rows[0]["closed"] == true);
  CHECK(fs::exists(out / "templates" / "WNN-C_m2.json"));
  CHECK(is_closed(load_template(out / "templates" / "WNN-C_m2.json"), {-2, 2}));
  const auto f = cli({"fixed-run", "--template", (out / "templates" / "WNN-C_m2.json").string(), "--manifest",
                      fx.manifest.string(), "--sparsity", "--repetition"});
  CHECK(f.code == 0);
}

TEST_CASE("default sweep has 50 rows and is deterministic") {
  const auto& fx = fixture();
  const std::vector<std::string> args{"--seed", "9", "--format", "json", "quantize", "--template",
                                      fx.tmpl.string(), "--manifest", fx.manifest.string(), "--eval-iterations",
                                      "3", "--swarm", "2", "--pso-iterations", "1", "--jobs", "4"};
  const auto a = cli(args), b = cli(args);
  REQUIRE(a.code == 0);
  auto ra = json_rows(a), rb = json_rows(b);
  CHECK(ra.size() == 50);
  for (auto* rows : {&ra, &rb})
    for (auto& row : *rows) {
      CHECK(row["closed"] == true);
      row.erase("wall_time");
    }
  CHECK(ra == rb);
}

TEST_CASE("project and analyze") {
  const auto p = cli({"--format", "json", "project", "--table", "3"});
  REQUIRE(p.code == 0);
  CHECK(json_rows(p).size() == 4);
  const auto t5 = cli({"--format", "json", "project", "--table", "5"});
  REQUIRE(t5.code == 0);
  for (const auto& row : json_rows(t5)) CHECK(row["speedup"].is_null());
  CHECK(cli({"project", "--table", "5", "--baseline-stages", "1,2"}).code == 1);

  const auto& fx = fixture();
  const auto a = cli({"--format", "json", "analyze", fx.tmpl.string()});
  REQUIRE(a.code == 0);
  CHECK(json_rows(a).size() == 2);
}

TEST_CASE("config file supplies defaults") {
  const auto& fx = fixture();
  const auto dir = fresh_dir("config");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << nlohmann::json{{"manifest", fx.manifest.string()}, {"strategies", {"PI"}}, {"batches", {"L"}},
                          {"m_values", {0, 1}}, {"eval_iterations", 3},
                          {"pso", {{"swarm_size", 2}, {"iterations", 1}}}}
               .dump();
  }
  const auto r = cli({"--config", (dir / "cfg.json").string(), "--format", "json", "quantize", "--template",
                      fx.tmpl.string()});
  REQUIRE(r.code == 0);
  const auto rows = json_rows(r);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1]["label"] == "PI-L");
  CHECK(rows[1]["m"] == 1);
  std::ofstream(dir / "bad.json") << "{";
  CHECK(cli({"--config", (dir / "bad.json").string(), "bench"}).code == 2);
}
