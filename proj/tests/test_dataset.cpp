#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cennq/dataset.hpp"
#include "cennq/errors.hpp"

using namespace cennq;
namespace fs = std::filesystem;

namespace {

std::size_t differing(const TrainingPair& p) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.input.size(); ++i) n += p.input.values()[i] != p.ideal.values()[i];
  return n;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "cennq_test_dataset" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("noise flips an exact pixel count") {
  SynthOptions o;
  o.seed = 3;
  const auto p = synthesize(o);
  REQUIRE(p.size() == 1);
  CHECK(p[0].input.rows() == 32);
  CHECK(differing(p[0]) == 102);
  o.noise_level = 0.0;
  CHECK(differing(synthesize(o)[0]) == 0);
  o.noise_level = 0.25;
  o.size = 10;
  CHECK(differing(synthesize(o)[0]) == 25);
}

TEST_CASE("ideals are binary and synthesis is seeded") {
  for (auto k : {SynthKind::Noise, SynthKind::Edge, SynthKind::Detect}) {
    SynthOptions o;
    o.kind = k;
    o.count = 3;
    o.seed = 11;
    const auto a = synthesize(o), b = synthesize(o);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].input == b[i].input);
      CHECK(a[i].ideal == b[i].ideal);
      for (double v : a[i].ideal.values()) CHECK((v == 1.0 || v == -1.0));
    }
    o.seed = 12;
    CHECK_FALSE(synthesize(o)[0].ideal == a[0].ideal);
  }
  CHECK(parse_synth_kind(to_string(SynthKind::Edge)) == SynthKind::Edge);
  CHECK_THROWS_AS(parse_synth_kind("blur"), std::invalid_argument);
}

TEST_CASE("manifest round trip") {
  SynthOptions o;
  o.count = 5;
  o.size = 16;
  const auto pairs = synthesize(o);
  const auto dir = fresh_dir("five");
  const auto manifest = write_dataset(dir, pairs, "noise");
  CHECK(read_manifest(manifest).size() == 5);
  const auto back = load_pairs(manifest);
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back[i].ideal == pairs[i].ideal);
    CHECK(back[i].input == pairs[i].input);
  }
}

TEST_CASE("bad manifests") {
  const auto dir = fresh_dir("bad");
  std::ofstream(dir / "m.json") << "{\"pairs\": [{\"input\": \"nope.pgm\", \"ideal\": \"nope.pgm\"}]}";
  CHECK_THROWS_AS(load_pairs(dir / "m.json"), DataError);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(read_manifest(dir / "broken.json"), DataError);
  CHECK_THROWS_AS(read_manifest(dir / "absent.json"), DataError);
}

TEST_CASE("template json") {
  TemplateSet t = expand_pattern(SymmetryPattern::segmentation(),
                                 std::vector<double>{0.5, -1, 0, 2, 4, 0, 0.25, 0, 1, -0.5});
  t.bias = -0.37;
  t.dt = 0.5;
  const auto j = template_to_json(t);
  CHECK(j.contains("a_shift"));
  CHECK(j["a_shift"][1]["p"] == 0);
  CHECK(j["a_shift"][1]["sign"] == -1);
  CHECK(template_from_json(j) == t);

  t.a[0] = 0.3;
  t.a[8] = 0.3;
  CHECK_FALSE(template_to_json(t).contains("a_shift"));

  const auto nested = nlohmann::json::parse(
      R"({"a": [[0,0,0],[0,2,0],[0,0,0]], "b": [0,0,0,0,1,0,0,0,0], "i": 0.1, "dt": 1})");
  const auto n = template_from_json(nested);
  CHECK(n.a[4] == 2);
  CHECK(n.b[4] == 1);
  CHECK(n.bias == 0.1);

  const auto dir = fresh_dir("tmpl");
  save_template(dir / "t.json", n);
  CHECK(load_template(dir / "t.json") == n);
  CHECK_THROWS_AS(template_from_json(nlohmann::json::parse(R"({"a": [1, 2]})")), DataError);
  CHECK_THROWS_AS(load_template(dir / "missing.json"), DataError);
}
