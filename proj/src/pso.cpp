#include "cennq/pso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "cennq/errors.hpp"

namespace cennq {

PsoConfig PsoConfig::with_range_exponent(int m) {
  PsoConfig cfg;
  const double bound = std::ldexp(1.0, m);
  cfg.bound_low = {-bound};
  cfg.bound_high = {bound};
  return cfg;
}

void PsoConfig::validate(std::size_t dim) const {
  if (swarm_size < 1) throw std::invalid_argument("PSO swarm_size must be >= 1");
  if (iterations < 1) throw std::invalid_argument("PSO iterations must be >= 1");
  if (threads < 1) throw std::invalid_argument("PSO threads must be >= 1");
  auto sized = [dim](const std::vector<double>& v) { return v.size() == 1 || v.size() == dim; };
  if (!sized(bound_low) || !sized(bound_high))
    throw std::invalid_argument("PSO bounds must have 1 or " + std::to_string(dim) + " entries");
  for (std::size_t d = 0; d < std::max<std::size_t>(dim, 1); ++d) {
    if (!std::isfinite(low(d)) || !std::isfinite(high(d)) || low(d) > high(d))
      throw std::invalid_argument("PSO bound_low must not exceed bound_high");
  }
  for (double v : {inertia, accel_personal, accel_global})
    if (!std::isfinite(v)) throw std::invalid_argument("PSO coefficients must be finite");
}

Particle update_particle(Particle p, std::span<const double> global_best, const PsoConfig& cfg,
                         std::span<const double> r1, std::span<const double> r2) {
  const std::size_t dim = p.position.size();
  if (p.velocity.size() != dim || p.best_position.size() != dim || global_best.size() != dim ||
      r1.size() != dim || r2.size() != dim)
    throw std::invalid_argument("update_particle: dimension mismatch");
  for (std::size_t d = 0; d < dim; ++d) {
    const double x = p.position[d];
    const double v = cfg.inertia * p.velocity[d] +
                     cfg.accel_personal * r1[d] * (p.best_position[d] - x) +
                     cfg.accel_global * r2[d] * (global_best[d] - x);
    p.velocity[d] = v;
    p.position[d] = std::clamp(x + v, cfg.low(d), cfg.high(d));
  }
  return p;
}

Particle update_particle(Particle p, std::span<const double> global_best, const PsoConfig& cfg,
                         Rng& rng) {
  const std::size_t dim = p.position.size();
  std::vector<double> r1(dim), r2(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    r1[d] = unit_uniform(rng);
    r2[d] = unit_uniform(rng);
  }
  return update_particle(std::move(p), global_best, cfg, r1, r2);
}

namespace {

void scatter(Particle& p, std::size_t dim, const PsoConfig& cfg, Rng& rng) {
  p.position.resize(dim);
  p.velocity.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double lo = cfg.low(d), hi = cfg.high(d);
    const double half = 0.5 * (hi - lo);
    p.position[d] = uniform_in(rng, lo, hi);
    p.velocity[d] = uniform_in(rng, -half, half);
  }
}

void evaluate_all(const ObjectiveFn& objective, const std::vector<Particle>& swarm,
                  std::vector<double>& values, int threads) {
  const std::size_t n = swarm.size();
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) values[i] = objective(swarm[i].position);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) values[i] = objective(swarm[i].position);
    });
  }
}

}  // namespace

PsoResult minimize(const ObjectiveFn& objective, std::size_t dim, const PsoConfig& cfg,
                   std::span<const double> incumbent) {
  cfg.validate(dim);
  if (!incumbent.empty() && incumbent.size() != dim)
    throw std::invalid_argument("minimize: incumbent has the wrong dimension");

  PsoResult result;
  if (dim == 0) {
    result.best_value = objective({});
    result.evaluations = 1;
    result.history.assign(1, result.best_value);
    if (!std::isfinite(result.best_value))
      throw NumericalError("objective is not finite for the fully pinned template");
    return result;
  }

  const auto n = static_cast<std::size_t>(cfg.swarm_size);
  std::vector<Rng> streams;
  std::vector<Particle> swarm(n);
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    streams.push_back(make_stream(cfg.seed, i));
    scatter(swarm[i], dim, cfg, streams[i]);
    swarm[i].best_position = swarm[i].position;
  }
  if (!incumbent.empty()) {
    for (std::size_t d = 0; d < dim; ++d)
      swarm[0].position[d] = std::clamp(incumbent[d], cfg.low(d), cfg.high(d));
    swarm[0].best_position = swarm[0].position;
  }

  std::vector<double> values(n);
  std::vector<double> global_best;
  double global_value = std::numeric_limits<double>::infinity();
  result.history.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int it = 0; it < cfg.iterations; ++it) {
    evaluate_all(objective, swarm, values, cfg.threads);
    result.evaluations += n;
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = swarm[i];
      if (!std::isfinite(values[i])) {
        scatter(p, dim, cfg, streams[i]);
        ++result.reinitialized;
        continue;
      }
      if (values[i] < p.best_value) {
        p.best_value = values[i];
        p.best_position = p.position;
      }
    }
    for (const auto& p : swarm) {
      if (p.best_value < global_value) {
        global_value = p.best_value;
        global_best = p.best_position;
      }
    }
    result.history.push_back(global_value);
    if (it + 1 == cfg.iterations) break;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& social = global_best.empty() ? swarm[i].position : global_best;
      swarm[i] = update_particle(std::move(swarm[i]), std::vector<double>(social), cfg, streams[i]);
    }
  }

  if (global_best.empty())
    throw NumericalError("no particle produced a finite objective value");
  result.best_position = std::move(global_best);
  result.best_value = global_value;
  return result;
}

double objective(const CellGrid& output, const CellGrid& ideal) {
  if (!output.same_shape(ideal)) throw std::invalid_argument("objective: shape mismatch");
  double sum = 0.0;
  auto o = output.values();
  auto d = ideal.values();
  for (std::size_t i = 0; i < o.size(); ++i) sum += std::abs(o[i] - d[i]);
  return sum / static_cast<double>(o.size());
}

double accuracy_percent(double objective_sum, std::size_t pairs) {
  if (pairs == 0) throw std::invalid_argument("accuracy_percent: no pairs");
  return 100.0 * (1.0 - objective_sum / (2.0 * static_cast<double>(pairs)));
}

void TrainingTask::validate() const {
  if (pairs.empty()) throw std::invalid_argument("training task has no pairs");
  for (const auto& p : pairs) {
    if (p.input.empty() || !p.input.same_shape(p.ideal))
      throw std::invalid_argument("training pair input/ideal shapes differ");
    if (!p.input.same_shape(pairs.front().input))
      throw std::invalid_argument("training pairs must share dimensions");
  }
  pattern.validate();
  if (iterations_per_eval < 1) throw std::invalid_argument("iterations_per_eval must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("task dt must be > 0");
  for (const auto& [idx, v] : frozen) {
    if (idx < 0 || idx >= pattern.free_count)
      throw std::invalid_argument("frozen index " + std::to_string(idx) + " out of range");
    if (!std::isfinite(v)) throw std::invalid_argument("frozen value is not finite");
  }
}

std::vector<int> TrainingTask::searched_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < pattern.free_count; ++i)
    if (!frozen.contains(i)) idx.push_back(i);
  return idx;
}

std::size_t TrainingTask::search_dimension() const {
  return searched_indices().size() + (fixed_bias ? 0 : 1);
}

double TrainingTask::evaluate(const TemplateSet& t) const {
  double total = 0.0;
  try {
    for (const auto& p : pairs) total += objective(cennq::run(p.input, t, iterations_per_eval, run), p.ideal);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
  return total;
}

TemplateSet TrainingTask::compose(std::span<const double> position,
                                  std::span<const double> base_params, double base_bias) const {
  std::vector<double> params(base_params.begin(), base_params.end());
  if (params.size() != static_cast<std::size_t>(pattern.free_count))
    throw std::invalid_argument("compose: base parameter count mismatch");
  for (const auto& [idx, v] : frozen) params[static_cast<std::size_t>(idx)] = v;
  const auto searched = searched_indices();
  if (position.size() != search_dimension())
    throw std::invalid_argument("compose: position has the wrong dimension");
  for (std::size_t j = 0; j < searched.size(); ++j)
    params[static_cast<std::size_t>(searched[j])] = position[j];
  TemplateSet t = expand_pattern(pattern, params);
  t.bias = fixed_bias ? *fixed_bias : (searched.size() < position.size() ? position.back() : base_bias);
  t.dt = dt;
  return t;
}

TrainResult train(const TrainingTask& task, const PsoConfig& cfg,
                  const std::optional<TemplateSet>& start) {
  task.validate();
  std::vector<double> base(static_cast<std::size_t>(task.pattern.free_count), 0.0);
  double base_bias = 0.0;
  if (start) {
    base = extract_params(task.pattern, start->a, start->b);
    base_bias = start->bias;
  }

  const auto searched = task.searched_indices();
  std::vector<double> incumbent;
  if (start) {
    for (int i : searched) incumbent.push_back(base[static_cast<std::size_t>(i)]);
    if (!task.fixed_bias) incumbent.push_back(base_bias);
  }

  const auto objective_fn = [&](std::span<const double> pos) {
    return task.evaluate(task.compose(pos, base, base_bias));
  };
  const PsoResult r = minimize(objective_fn, task.search_dimension(), cfg, incumbent);

  TrainResult out;
  out.best = task.compose(r.best_position, base, base_bias);
  out.best_objective = r.best_value;
  out.history = r.history;
  out.reinitialized = r.reinitialized;
  return out;
}

TrainResult retrain_bias(const TrainingTask& task, const PsoConfig& cfg,
                         const TemplateSet& quantized) {
  TrainingTask pinned = task;
  pinned.frozen.clear();
  const auto params = extract_params(task.pattern, quantized.a, quantized.b);
  for (std::size_t i = 0; i < params.size(); ++i) pinned.frozen[static_cast<int>(i)] = params[i];
  pinned.fixed_bias.reset();
  return train(pinned, cfg, quantized);
}

}  // namespace cennq
