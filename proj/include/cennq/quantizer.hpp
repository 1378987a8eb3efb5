#pragma once

#include <string>
#include <vector>

#include "cennq/pso.hpp"
#include "cennq/rng.hpp"
#include "cennq/template.hpp"

namespace cennq {

/// Power-of-two quantization set {0} U {+-2^p : k <= p <= m}.
struct QuantSet {
  int k = -2;
  int m = 2;

  void validate() const;
  /// All values sorted ascending; 2 (m - k + 1) + 1 entries.
  std::vector<double> values() const;
  /// ceil(log2(2 (m - k + 1) + 1)) + 1, the last bit being the sign.
  int bit_width() const;
  bool contains(double v) const;

  /// The symmetric set k = -m used throughout the sweeps.
  static QuantSet symmetric(int m) { return {-m, m}; }
};

std::vector<double> quant_values(const QuantSet& qs);
int bit_width(const QuantSet& qs);

/// Threshold below which a magnitude is pruned to zero.
enum class ZeroRule {
  /// |v| < 2^(k-1): the midpoint between 0 and the smallest magnitude 2^k.
  Midpoint,
  /// |v| < 2^(-k-1) as printed in the original rule. Kept for comparison;
  /// for k < 0 it prunes values the set could otherwise represent.
  Printed,
};

/// Maps v to sign(v) * 2^p when 3 * 2^(p-2) <= |v| < 3 * 2^(p-1), saturates
/// at 2^m and prunes small magnitudes per `rule`. With the Midpoint rule this
/// is the nearest set element, ties going to the larger magnitude.
double quantize_value(double v, const QuantSet& qs, ZeroRule rule = ZeroRule::Midpoint);

/// Distance from |v| to its nearest power of two, decided by comparing |v|
/// with the midpoint of the enclosing powers 2^floor(log2|v|) and twice that.
/// Zero maps to zero.
double nn_distance(double v);

enum class Strategy {
  Random,           ///< RAN
  Pruning,          ///< PI: largest magnitude first
  WeightedPruning,  ///< WPI: largest magnitude * rq first
  Nearest,          ///< NN: smallest nearest-power distance first
  WeightedNearest,  ///< WNN: smallest distance / rq first
};

inline constexpr Strategy kAllStrategies[] = {Strategy::Random, Strategy::Pruning,
                                              Strategy::WeightedPruning, Strategy::Nearest,
                                              Strategy::WeightedNearest};

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct BatchPolicy {
  enum class Kind { Constant, LogScale };
  Kind kind = Kind::Constant;
  double fraction = 0.2;

  /// Constant: ceil(fraction * total). LogScale: fraction * remaining rounded
  /// half up, at least 1. Never more than `remaining`.
  std::size_t size(std::size_t total, std::size_t remaining) const;
  /// Suffix used in strategy labels: "C" or "L".
  std::string suffix() const { return kind == Kind::Constant ? "C" : "L"; }

  static BatchPolicy constant(double fraction = 0.2) { return {Kind::Constant, fraction}; }
  static BatchPolicy log_scale(double fraction = 0.5) { return {Kind::LogScale, fraction}; }
};

BatchPolicy parse_batch(const std::string& s);

/// Batch sizes of successive rounds until `total` parameters are quantized.
std::vector<std::size_t> batch_schedule(std::size_t total, const BatchPolicy& batch);

/// "WNN-C", "PI-L", ...
std::string strategy_label(Strategy s, const BatchPolicy& batch);

struct RoundRecord {
  int round = 0;
  std::vector<int> selected;
  std::vector<double> before;  ///< values of `selected` prior to quantization
  std::vector<double> after;   ///< their quantized values
  double objective_quantized = 0.0;  ///< right after quantizing the batch
  double objective = 0.0;            ///< after re-training U
};

/// Partition of the free parameters into quantized (Q) and pending (U).
struct QuantizationState {
  std::vector<double> params;
  std::vector<bool> quantized;
  std::vector<int> repetition;
  Strategy strategy = Strategy::WeightedNearest;
  BatchPolicy batch;
  std::vector<RoundRecord> rounds;

  static QuantizationState start(const SymmetryPattern& pattern, std::vector<double> params,
                                 Strategy strategy, BatchPolicy batch);

  std::vector<int> unquantized() const;
  std::size_t total() const { return params.size(); }
  void validate() const;
};

/// U ordered by the strategy key; ties keep ascending index order.
std::vector<int> priority_order(const QuantizationState& state, Rng& rng);

/// First batch-size indices of `priority_order`. Throws if U is empty.
std::vector<int> select_batch(const QuantizationState& state, Rng& rng);

struct QuantizeOptions {
  QuantSet qs;
  Strategy strategy = Strategy::WeightedNearest;
  BatchPolicy batch;
  /// Re-training swarm; its bounds are replaced by [-2^m, 2^m] unless
  /// `keep_bounds` is set. Round r uses seed mix(pso.seed, r).
  PsoConfig pso;
  bool keep_bounds = false;
  ZeroRule zero_rule = ZeroRule::Midpoint;
};

struct QuantizeResult {
  TemplateSet quantized;
  std::vector<RoundRecord> rounds;
  double initial_objective = 0.0;
  double final_objective = 0.0;  ///< after the closing bias re-training
  QuantizationState state;
};

/// Partition, quantize, freeze and re-train until every A/B parameter is in
/// the set, then re-train the bias alone. A round that worsens the objective
/// is recorded, not rolled back.
QuantizeResult incremental_quantize(const TemplateSet& tmpl, const TrainingTask& task,
                                    const QuantizeOptions& opts);

/// True when every A and B entry is an element of the set.
bool is_closed(const TemplateSet& t, const QuantSet& qs);

}  // namespace cennq
