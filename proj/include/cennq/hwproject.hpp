#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cennq {

/// Per-module LE and register costs. Shifter keys are "S1(0)".."S1(5)" and "S2(7)".
struct ResourceCosts {
  std::map<std::string, int> le_per_shifter;
  std::map<std::string, int> reg_per_shifter;
  int le_per_multiplier = 676;
  int reg_per_multiplier = 486;
  int adder_le = 10;

  static ResourceCosts defaults();
  static std::string s1_key(int m) { return "S1(" + std::to_string(m) + ")"; }
  int shifter_le(int m) const;
  int shifter_reg(int m) const;
  void validate() const;
};

struct FpgaBudget {
  std::string name;
  long total_le = 0;
  long total_registers = 0;
  long embedded_multipliers = 0;
  double le_utilization_cap = 0.8;  ///< also applied to registers

  void validate() const;
  double le_cap() const { return le_utilization_cap * static_cast<double>(total_le); }
  double reg_cap() const { return le_utilization_cap * static_cast<double>(total_registers); }
};

struct StageCost {
  long le = 0;
  long registers = 0;
  long multipliers = 0;
};

/// One stage layout: two convolution units of `elements` multipliers or
/// shifters each. Base costs are calibration inputs.
struct StageConfig {
  std::string name;
  int elements = 1;  ///< 1, 3 or 9 per convolution unit
  int units = 2;
  StageCost multiplier_stage;
  StageCost shifter_stage;  ///< measured with S1(calibration_m) shifters
  int calibration_m = 5;
  /// Extra logic per stage for the repetition pre-sum adders.
  long repetition_le = 0;
  long repetition_registers = 0;

  void validate() const;
  /// Shifter stage cost rescaled to S1(m) by the per-shifter cost deltas.
  StageCost shifter_cost(const ResourceCosts& costs, int m) const;
};

struct StageOptions {
  bool shifters = true;  ///< place shifter stages once multipliers run out
  bool repetition = false;
  int m = 5;
};

struct StagePlan {
  int stage_count = 0;
  int multiplier_stages = 0;
  int shifter_stages = 0;
  long mults_used = 0;
  long shifters_used = 0;
  long le_used = 0;
  long reg_used = 0;
  double clock_mhz = 0.0;
  int cycles_per_pixel = 0;
  bool infeasible = false;  ///< not even one stage fits
};

/// Multiplier stages first, then shifter stages until the LE or register cap
/// binds. Monotone in every budget dimension as long as a multiplier stage
/// costs no more LEs and registers than a shifter stage.
StagePlan max_stages(const FpgaBudget& budget, const ResourceCosts& costs,
                     const StageConfig& config, const StageOptions& opts = {});

/// stage_count * clock_mhz / cycles_per_pixel.
double equivalent_capacity(const StagePlan& plan);

/// Ratio of equivalent capacities; with `ignore_clock` the clocks cancel.
double speedup(const StagePlan& ours, const StagePlan& baseline, bool ignore_clock);

/// One column of a published comparison table.
struct ProjectionColumn {
  std::string label;
  std::string device;
  std::string config;
  StageOptions options;
  double clock_mhz = 0.0;
  int cycles_per_pixel = 1;
  std::optional<int> baseline_column;  ///< index of the column it is compared with
  std::optional<int> reported_stages;
  std::optional<double> reported_speedup;
  /// Published baseline stage count when the table omits the baseline column.
  std::optional<int> baseline_stages;
};

struct ProjectionTable {
  std::string id;
  std::string title;
  std::vector<ProjectionColumn> columns;
};

struct Calibration {
  int version = 1;
  std::string source;
  ResourceCosts costs;
  std::map<std::string, FpgaBudget> devices;
  std::map<std::string, StageConfig> configs;
  std::vector<ProjectionTable> tables;

  static Calibration from_json(const nlohmann::json& j);
  static Calibration load(const std::filesystem::path& path);
  const FpgaBudget& device(const std::string& name) const;
  const StageConfig& config(const std::string& name) const;
};

struct ProjectionRow {
  std::string table;
  std::string label;
  StagePlan plan;
  double le_fraction = 0.0;
  double reg_fraction = 0.0;
  std::optional<double> speedup;  ///< absent when no baseline is available
  std::optional<int> reported_stages;
  std::optional<double> reported_speedup;
};

/// Evaluates every column. A column without a baseline column uses its
/// published `baseline_stages`, then `model_baseline` (a multiplier-only
/// plan on the same device), else reports no speedup.
std::vector<ProjectionRow> project_table(const Calibration& cal, const ProjectionTable& table,
                                         bool model_baseline = false);

}  // namespace cennq
