#include "cennq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cennq/errors.hpp"
#include "cennq/fixed_point.hpp"
#include "cennq/pgm.hpp"
#include "cennq/rng.hpp"

namespace cennq {

using nlohmann::json;

namespace {

json kernel_json(const Kernel3& k) { return json(std::vector<double>(k.begin(), k.end())); }

Kernel3 kernel_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  Kernel3 k{};
  std::vector<double> flat;
  if (v.is_array() && v.size() == 3 && v[0].is_array()) {
    for (const auto& row : v) {
      if (row.size() != 3) throw DataError(std::string(key) + ": rows must have 3 entries");
      for (const auto& x : row) flat.push_back(x.get<double>());
    }
  } else {
    flat = v.get<std::vector<double>>();
  }
  if (flat.size() != 9) throw DataError(std::string(key) + ": expected 9 coefficients");
  std::copy(flat.begin(), flat.end(), k.begin());
  return k;
}

bool is_shift_kernel(const Kernel3& k) {
  for (double v : k) {
    try {
      (void)ShiftCoeff::from_value(v);
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
  return true;
}

json shift_json(const Kernel3& k) {
  json out = json::array();
  for (double v : k) {
    const auto c = ShiftCoeff::from_value(v);
    out.push_back(c.is_zero() ? json{{"sign", 0}, {"p", nullptr}} : json{{"sign", c.sign}, {"p", c.exponent}});
  }
  return out;
}

}  // namespace

json template_to_json(const TemplateSet& t) {
  json j{{"a", kernel_json(t.a)}, {"b", kernel_json(t.b)}, {"i", t.bias}, {"dt", t.dt}};
  if (t.pattern) j["pattern"] = t.pattern->name;
  if (is_shift_kernel(t.a) && is_shift_kernel(t.b)) {
    j["a_shift"] = shift_json(t.a);
    j["b_shift"] = shift_json(t.b);
  }
  return j;
}

TemplateSet template_from_json(const json& j) {
  try {
    TemplateSet t;
    t.a = kernel_from(j, "a");
    t.b = kernel_from(j, "b");
    t.bias = j.value("i", j.value("bias", 0.0));
    t.dt = j.value("dt", 1.0);
    if (j.contains("pattern") && !j.at("pattern").is_null())
      t.pattern = SymmetryPattern::named(j.at("pattern").get<std::string>());
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("template: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("template: ") + e.what());
  }
}

TemplateSet load_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return template_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_template(const std::filesystem::path& path, const TemplateSet& t) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << template_to_json(t).dump(2) << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    const json j = json::parse(in);
    std::vector<ManifestEntry> out;
    for (const auto& p : j.at("pairs"))
      out.push_back({p.at("input").get<std::string>(), p.at("ideal").get<std::string>()});
    if (out.empty()) throw DataError(path.string() + ": manifest lists no pairs");
    return out;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<TrainingPair> load_pairs(const std::filesystem::path& manifest) {
  const auto base = manifest.parent_path();
  std::vector<TrainingPair> pairs;
  for (const auto& e : read_manifest(manifest)) {
    TrainingPair p{read_pgm(base / e.input), read_pgm(base / e.ideal)};
    if (!p.input.same_shape(p.ideal)) throw DataError(e.input + " and " + e.ideal + " differ in size");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::Noise: return "noise";
    case SynthKind::Edge: return "edge";
    case SynthKind::Detect: return "detect";
  }
  return "?";
}

SynthKind parse_synth_kind(const std::string& s) {
  for (auto k : {SynthKind::Noise, SynthKind::Edge, SynthKind::Detect})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown data kind '" + s + "' (noise, edge, detect)");
}

namespace {

CellGrid random_shapes(std::size_t n, Rng& rng) {
  CellGrid g(n, n, -1.0);
  const int shapes = 2 + static_cast<int>(uniform_index(rng, 3));
  const auto dim = static_cast<double>(n);
  for (int s = 0; s < shapes; ++s) {
    const double cr = uniform_in(rng, 0.15 * dim, 0.85 * dim);
    const double cc = uniform_in(rng, 0.15 * dim, 0.85 * dim);
    const double h = uniform_in(rng, 0.08 * dim, 0.22 * dim);
    const double w = uniform_in(rng, 0.08 * dim, 0.22 * dim);
    const bool disk = uniform_index(rng, 2) == 1;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const double dr = (static_cast<double>(r) + 0.5 - cr) / h;
        const double dc = (static_cast<double>(c) + 0.5 - cc) / w;
        const bool inside = disk ? dr * dr + dc * dc <= 1.0 : std::abs(dr) <= 1.0 && std::abs(dc) <= 1.0;
        if (inside) g(r, c) = 1.0;
      }
  }
  return g;
}

CellGrid boundary_of(const CellGrid& g) {
  CellGrid e(g.rows(), g.cols(), -1.0);
  const auto rows = static_cast<long>(g.rows());
  const auto cols = static_cast<long>(g.cols());
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      if (g(r, c) < 0) continue;
      const long nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& p : nb) {
        const bool outside = p[0] < 0 || p[0] >= rows || p[1] < 0 || p[1] >= cols;
        if (outside || g(p[0], p[1]) < 0) {
          e(r, c) = 1.0;
          break;
        }
      }
    }
  return e;
}

}  // namespace

std::vector<TrainingPair> synthesize(const SynthOptions& opts) {
  if (opts.size < 8) throw std::invalid_argument("synthetic images need size >= 8");
  if (opts.count < 1) throw std::invalid_argument("count must be >= 1");
  if (!(opts.noise_level >= 0.0) || opts.noise_level > 1.0)
    throw std::invalid_argument("noise level must lie in [0, 1]");
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < opts.count; ++i) {
    Rng rng = make_stream(opts.seed, i);
    const CellGrid shapes = random_shapes(opts.size, rng);
    TrainingPair p;
    switch (opts.kind) {
      case SynthKind::Noise: {
        p.ideal = shapes;
        p.input = shapes;
        const std::size_t area = shapes.size();
        const auto flips = static_cast<std::size_t>(std::floor(opts.noise_level * static_cast<double>(area) + 0.5));
        std::vector<std::size_t> idx(area);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t j = 0; j < flips; ++j) {
          std::swap(idx[j], idx[j + uniform_index(rng, area - j)]);
          p.input.values()[idx[j]] = -p.input.values()[idx[j]];
        }
        break;
      }
      case SynthKind::Edge:
        p.input = shapes;
        p.ideal = boundary_of(shapes);
        break;
      case SynthKind::Detect: {
        p.ideal = shapes;
        p.input = shapes;
        const double n = static_cast<double>(opts.size);
        for (std::size_t r = 0; r < opts.size; ++r)
          for (std::size_t c = 0; c < opts.size; ++c)
            if (shapes(r, c) < 0) p.input(r, c) = -1.0 + 1.2 * (static_cast<double>(r + c) / (2.0 * n));
        break;
      }
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const std::vector<TrainingPair>& pairs,
                                    const std::string& prefix, const json& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  json manifest = meta.is_object() ? meta : json::object();
  manifest["version"] = 1;
  manifest["pairs"] = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "_%03zu", i);
    const std::string in = prefix + stem + "_input.pgm";
    const std::string id = prefix + stem + "_ideal.pgm";
    write_pgm(dir / in, pairs[i].input);
    write_pgm(dir / id, pairs[i].ideal);
    manifest["pairs"].push_back({{"input", in}, {"ideal", id}});
  }
  const auto path = dir / "manifest.json";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  return path;
}

}  // namespace cennq
