#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cennq/pso.hpp"
#include "json.hpp"

namespace cennq {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Settings shared by train and quantize; loaded from --config and then
/// overridden by explicit flags.
struct ExperimentConfig {
  std::string manifest;
  std::string pattern = "segmentation";
  std::vector<std::string> strategies{"RAN", "PI", "WPI", "NN", "WNN"};
  std::vector<std::string> batches{"C", "L"};
  std::vector<int> m_values{0, 1, 2, 3, 4};
  int swarm_size = 10;
  int pso_iterations = 500;
  double inertia = 0.8;
  double accel_personal = 1.4;
  double accel_global = 1.2;
  int train_range = 2;  ///< training bounds [-2^m, 2^m]
  int eval_iterations = 20;
  double dt = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  int jobs = 1;
  int threads = 1;

  static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
  /// Throws std::invalid_argument on out-of-range settings and DataError
  /// when the manifest does not exist.
  void validate(bool need_manifest) const;
  PsoConfig pso(int range_exponent) const;
};

/// One sweep configuration of the quantize report.
struct ReportRow {
  std::string label;
  std::string strategy;
  std::string batch;
  int m = 0;
  int k = 0;
  int bits = 0;
  double objective = 0.0;  ///< against the unquantized template's outputs
  double accuracy = 0.0;
  double truth_objective = 0.0;  ///< against the manifest ideals
  double truth_accuracy = 0.0;
  int rounds = 0;
  bool closed = false;
  double wall_time = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// Entry point behind the `cennq` executable; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cennq
