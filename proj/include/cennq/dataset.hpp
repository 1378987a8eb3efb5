#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cennq/pso.hpp"
#include "cennq/template.hpp"
#include "json.hpp"

namespace cennq {

// Template files: {"a": [9], "b": [9], "i": bias, "dt": step, "pattern": name}.
// A and B may also be given as 3x3 nested arrays. When every entry is zero or
// +-2^p the writer adds "a_shift"/"b_shift" lists of {"sign", "p"}.
nlohmann::json template_to_json(const TemplateSet& t);
TemplateSet template_from_json(const nlohmann::json& j);
TemplateSet load_template(const std::filesystem::path& path);
void save_template(const std::filesystem::path& path, const TemplateSet& t);

/// Image pair file names, relative to the manifest's directory.
struct ManifestEntry {
  std::string input;
  std::string ideal;
};

/// {"version": 1, "pairs": [{"input": ..., "ideal": ...}], ...}
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<TrainingPair> load_pairs(const std::filesystem::path& manifest);

enum class SynthKind {
  Noise,   ///< salt-and-pepper flips over binary shapes
  Edge,    ///< binary shapes to their 4-connected boundary
  Detect,  ///< shapes over a gray gradient to the bare shapes
};

std::string to_string(SynthKind k);
SynthKind parse_synth_kind(const std::string& s);

struct SynthOptions {
  SynthKind kind = SynthKind::Noise;
  std::size_t size = 32;
  std::size_t count = 1;
  double noise_level = 0.1;  ///< flipped fraction for Noise
  std::uint64_t seed = 0;
};

/// Pairs with binary ideals (+1 black, -1 white). Noise inputs differ from the
/// ideal in exactly round(noise_level * size^2) cells.
std::vector<TrainingPair> synthesize(const SynthOptions& opts);

/// Writes <prefix>_NNN_input.pgm / _ideal.pgm and manifest.json into `dir`;
/// returns the manifest path. Throws DataError when `dir` is not writable.
std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const std::vector<TrainingPair>& pairs,
                                    const std::string& prefix, const nlohmann::json& meta = {});

}  // namespace cennq
