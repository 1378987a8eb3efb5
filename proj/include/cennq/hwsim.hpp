#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cennq/engine.hpp"
#include "cennq/fixed_point.hpp"
#include "cennq/grid.hpp"
#include "cennq/template.hpp"
#include "json.hpp"

namespace cennq {

using ShiftKernel = std::array<ShiftCoeff, 9>;

/// Template with every multiplier replaced by a shifter coefficient.
struct ShiftTemplate {
  ShiftKernel a{};
  ShiftKernel b{};
  double bias = 0.0;  ///< real-valued; encoded as a word at run time
  ShiftCoeff dt = ShiftCoeff::pow2(1, 0);

  /// Throws unless every A/B entry is 0 or +-2^p and dt = 2^s, -7 <= s <= 0.
  static ShiftTemplate from_template(const TemplateSet& t);
  TemplateSet to_template() const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Data scheduler

/// One shifter issue: the coefficient applied to the pre-summed operands.
struct ScheduleGroup {
  ShiftCoeff coefficient;
  std::vector<int> operands;  ///< template cell indices 0..8
};

struct ScheduleOptions {
  int shifters = 1;  ///< 1, 3 or 9 per convolution unit
  bool sparsity = false;
  bool repetition = false;
  /// Operands the side adder can pre-sum while the shifter is busy.
  int adder_fanin = 3;
};

struct SchedulePlan {
  std::vector<ScheduleGroup> groups;
  int skipped_zero_count = 0;
  int shifter_count = 1;
  int multiply_cycles = 0;
  bool repetition_applied = false;
};

/// Multiply schedule for one 3x3 template. Without optimizations every cell
/// is an issue (9 cycles on one shifter). Sparsity drops zero cells.
/// Repetition (single shifter only) merges cells sharing a coefficient into
/// one issue per `adder_fanin` operands. Cycles = ceil(issues / shifters).
SchedulePlan build_schedule(const ShiftKernel& coeffs, const ScheduleOptions& opts);

struct StageSchedule {
  SchedulePlan a;
  SchedulePlan b;
};

StageSchedule build_stage_schedule(const ShiftTemplate& t, const ScheduleOptions& opts);

/// Runs the plan over the nine operands; result in accumulator units.
std::int64_t execute_schedule(const SchedulePlan& plan, std::span<const std::int32_t, 9> operands);

/// Reference sum of the nine products in accumulator units.
std::int64_t naive_convolution(const ShiftKernel& coeffs, std::span<const std::int32_t, 9> operands);

enum class ShifterPool {
  PerUnit,  ///< A and B convolutions each own `shifters` shifters
  Shared,   ///< both convolutions issue into one pool
};

struct CycleModel {
  /// Fixed pipeline cycles added to time-multiplexed stages.
  int overhead = 2;
  ShifterPool pool = ShifterPool::PerUnit;
};

/// Cycles per pixel of a stage. A fully parallel unit (9 shifters) streams
/// one pixel per cycle; otherwise the slower convolution plus the overhead.
int cycles_per_pixel(const SchedulePlan& plan_a, const SchedulePlan& plan_b,
                     const CycleModel& model = {});

std::string to_text(const SchedulePlan& plan);
nlohmann::json to_json(const SchedulePlan& plan);

// ---------------------------------------------------------------------------
// Datapath

/// Grid of raw 18-bit words sharing one binary point.
struct FixedGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int frac_bits = kDefaultFracBits;
  std::vector<std::int32_t> raw;

  /// Encodes every cell; `saturations` counts clamped cells.
  static FixedGrid encode(const CellGrid& g, int frac_bits, std::size_t* saturations = nullptr);
  CellGrid decode() const;
  bool same_shape(const FixedGrid& o) const { return rows == o.rows && cols == o.cols; }
};

struct FixedStepResult {
  FixedGrid state;
  std::size_t saturations = 0;  ///< cells clamped at write-back
};

/// One pipeline stage evaluating the Euler update with shifts only. Products
/// enter a 48-bit accumulator carrying kGuardBits extra fractional bits, so
/// nothing is rounded or saturated before write-back; the S2 shift by dt is
/// followed by one round-to-nearest and an 18-bit saturation. The A and B
/// convolutions execute `schedule`.
FixedStepResult fixed_step(const FixedGrid& state, const FixedGrid& input, const ShiftTemplate& t,
                           const StageSchedule& schedule, Boundary boundary = Boundary::ZeroFixed);

/// Same with the unoptimized nine-issue schedule.
FixedStepResult fixed_step(const FixedGrid& state, const FixedGrid& input, const ShiftTemplate& t,
                           Boundary boundary = Boundary::ZeroFixed);

struct FixedRunOptions {
  int frac_bits = kDefaultFracBits;
  InitState init = InitState::Input;
  Boundary boundary = Boundary::ZeroFixed;
  ScheduleOptions schedule;
};

struct FixedRunResult {
  CellGrid state;
  CellGrid output;
  std::size_t saturations = 0;
  StageSchedule schedule;
};

/// An L-stage pipeline: `iterations` stages, then the activation.
FixedRunResult fixed_run(const CellGrid& input, const ShiftTemplate& t, int iterations,
                         const FixedRunOptions& opts = {});

// ---------------------------------------------------------------------------
// Template statistics

/// Sparsity and repetition counts of a 3x3 template.
struct TemplateStats {
  int zero_count = 0;
  int nonzero_count = 0;
  int distinct_nonzero_count = 0;
  int max_repetition = 0;  ///< multiplicity of the most frequent nonzero value
  int repeated_count = 0;  ///< nonzero cells whose value occurs more than once
};

TemplateStats analyze_template(const Kernel3& t);

}  // namespace cennq
