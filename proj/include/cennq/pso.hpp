#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cennq/engine.hpp"
#include "cennq/grid.hpp"
#include "cennq/rng.hpp"
#include "cennq/template.hpp"

namespace cennq {

/// Swarm settings. Defaults are N=10, c1=1.4, c2=1.2, w=0.8, 500 iterations
/// and bounds [-2^m, 2^m] with m=2.
struct PsoConfig {
  int swarm_size = 10;
  double inertia = 0.8;
  double accel_personal = 1.4;
  double accel_global = 1.2;
  int iterations = 500;
  /// One entry (broadcast to every dimension) or one per search dimension.
  std::vector<double> bound_low{-4.0};
  std::vector<double> bound_high{4.0};
  std::uint64_t seed = 0;
  /// Worker threads for objective evaluation; results do not depend on it.
  int threads = 1;

  /// Default configuration with bounds [-2^m, 2^m].
  static PsoConfig with_range_exponent(int m);

  double low(std::size_t d) const { return bound_low.size() == 1 ? bound_low[0] : bound_low[d]; }
  double high(std::size_t d) const { return bound_high.size() == 1 ? bound_high[0] : bound_high[d]; }

  void validate(std::size_t dim) const;
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_value = std::numeric_limits<double>::infinity();
};

/// Velocity and position update with caller-supplied draws r1[d], r2[d]:
///   v' = w v + c1 r1 (pb - p) + c2 r2 (gb - p),  p' = clamp(p + v')
/// The velocity is kept unclamped.
Particle update_particle(Particle p, std::span<const double> global_best, const PsoConfig& cfg,
                         std::span<const double> r1, std::span<const double> r2);

/// Same update drawing r1, r2 uniformly in [0, 1) per dimension from `rng`.
Particle update_particle(Particle p, std::span<const double> global_best, const PsoConfig& cfg,
                         Rng& rng);

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct PsoResult {
  std::vector<double> best_position;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> history;  ///< global best after each iteration
  std::size_t evaluations = 0;
  std::size_t reinitialized = 0;  ///< particles reset after a non-finite objective
};

/// Minimizes `objective` over the box given by `cfg`. When `incumbent` is
/// non-empty it becomes particle 0's starting position (clamped), so the
/// result is never worse than the incumbent. Particle i draws from its own
/// stream derived from (cfg.seed, i).
PsoResult minimize(const ObjectiveFn& objective, std::size_t dim, const PsoConfig& cfg,
                   std::span<const double> incumbent = {});

/// Mean absolute difference sum |output - ideal| / area.
double objective(const CellGrid& output, const CellGrid& ideal);

/// Accuracy in percent for an objective summed over `pairs` training pairs,
/// 100 * (1 - obj / (2 * pairs)); per-pixel error spans [0, 2].
double accuracy_percent(double objective_sum, std::size_t pairs);

struct TrainingPair {
  CellGrid input;
  CellGrid ideal;
};

struct TrainingTask {
  std::vector<TrainingPair> pairs;
  SymmetryPattern pattern = SymmetryPattern::segmentation();
  int iterations_per_eval = 20;
  double dt = 0.5;
  RunOptions run;
  /// Quantized set Q: free-parameter index -> pinned value.
  std::map<int, double> frozen;
  /// When set the bias is pinned; otherwise it is one extra search dimension.
  std::optional<double> fixed_bias;

  void validate() const;
  /// Free-parameter indices that PSO searches (the set U), ascending.
  std::vector<int> searched_indices() const;
  std::size_t search_dimension() const;
  /// Summed objective of `t` over all pairs; +inf when the run diverges.
  double evaluate(const TemplateSet& t) const;
  /// Template built from a search-space position (U values, then bias).
  TemplateSet compose(std::span<const double> position, std::span<const double> base_params,
                      double base_bias) const;
};

struct TrainResult {
  TemplateSet best;
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  std::size_t reinitialized = 0;
};

/// Searches the unfrozen parameters (and the bias unless pinned). `start`
/// supplies the incumbent; frozen entries always come from `task.frozen`.
/// With nothing to search the start template is evaluated and returned.
TrainResult train(const TrainingTask& task, const PsoConfig& cfg,
                  const std::optional<TemplateSet>& start = std::nullopt);

/// One-dimensional search over the bias with every A/B parameter pinned to
/// `quantized`. The incumbent bias seeds the swarm.
TrainResult retrain_bias(const TrainingTask& task, const PsoConfig& cfg,
                         const TemplateSet& quantized);

}  // namespace cennq
