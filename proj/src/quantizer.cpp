#include "cennq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cennq {

void QuantSet::validate() const {
  if (k > m) throw std::invalid_argument("quantization set needs k <= m");
  if (k < -60 || m > 60) throw std::invalid_argument("quantization exponents out of range");
}

std::vector<double> QuantSet::values() const {
  validate();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * (m - k + 1) + 1));
  for (int p = m; p >= k; --p) out.push_back(-std::ldexp(1.0, p));
  out.push_back(0.0);
  for (int p = k; p <= m; ++p) out.push_back(std::ldexp(1.0, p));
  return out;
}

int QuantSet::bit_width() const {
  validate();
  const int levels = 2 * (m - k + 1) + 1;
  int bits = 0;
  while ((1 << bits) < levels) ++bits;  // ceil(log2(levels)) without rounding error
  return bits + 1;
}

bool QuantSet::contains(double v) const {
  if (v == 0.0) return true;
  const double a = std::abs(v);
  if (!std::isfinite(a)) return false;
  int e = 0;
  const double mant = std::frexp(a, &e);  // a = mant * 2^e, mant in [0.5, 1)
  return mant == 0.5 && e - 1 >= k && e - 1 <= m;
}

std::vector<double> quant_values(const QuantSet& qs) { return qs.values(); }

int bit_width(const QuantSet& qs) { return qs.bit_width(); }

double quantize_value(double v, const QuantSet& qs, ZeroRule rule) {
  if (!std::isfinite(v)) throw std::invalid_argument("quantize_value: non-finite input");
  qs.validate();
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  if (a >= std::ldexp(1.0, qs.m)) return std::copysign(std::ldexp(1.0, qs.m), v);
  const double zero_below = rule == ZeroRule::Midpoint ? std::ldexp(1.0, qs.k - 1)
                                                       : std::ldexp(1.0, -qs.k - 1);
  if (a < zero_below) return 0.0;
  // 2^e <= a < 2^(e+1); the interval [3*2^(p-2), 3*2^(p-1)) picks p = e or e+1.
  const int e = std::ilogb(a);
  int p = a >= std::ldexp(3.0, e - 1) ? e + 1 : e;
  p = std::clamp(p, qs.k, qs.m);
  return std::copysign(std::ldexp(1.0, p), v);
}

double nn_distance(double v) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  if (!std::isfinite(a)) throw std::invalid_argument("nn_distance: non-finite input");
  const int fl = std::ilogb(a);  // floor(log2 |v|), exact
  const double below = std::ldexp(1.0, fl);
  const double above = std::ldexp(1.0, fl + 1);
  const double md = (below + above) / 2.0;
  return md > a ? a - below : above - a;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "RAN";
    case Strategy::Pruning: return "PI";
    case Strategy::WeightedPruning: return "WPI";
    case Strategy::Nearest: return "NN";
    case Strategy::WeightedNearest: return "WNN";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  for (auto st : kAllStrategies)
    if (to_string(st) == s) return st;
  throw std::invalid_argument("unknown strategy '" + s + "' (RAN, PI, WPI, NN, WNN)");
}

std::size_t BatchPolicy::size(std::size_t total, std::size_t remaining) const {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("batch fraction must lie in (0, 1]");
  if (remaining == 0) return 0;
  // The 1e-9 slack keeps products such as 0.2 * 10 from rounding across an
  // integer boundary.
  double raw = kind == Kind::Constant
                   ? std::ceil(fraction * static_cast<double>(total) - 1e-9)
                   : std::floor(fraction * static_cast<double>(remaining) + 0.5 + 1e-9);
  const auto n = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(n, remaining);
}

BatchPolicy parse_batch(const std::string& s) {
  if (s == "C" || s == "constant") return BatchPolicy::constant();
  if (s == "L" || s == "log" || s == "logscale") return BatchPolicy::log_scale();
  throw std::invalid_argument("unknown batch mode '" + s + "' (C or L)");
}

std::vector<std::size_t> batch_schedule(std::size_t total, const BatchPolicy& batch) {
  std::vector<std::size_t> sizes;
  std::size_t remaining = total;
  while (remaining > 0) {
    const std::size_t n = batch.size(total, remaining);
    sizes.push_back(n);
    remaining -= n;
  }
  return sizes;
}

std::string strategy_label(Strategy s, const BatchPolicy& batch) {
  return to_string(s) + "-" + batch.suffix();
}

QuantizationState QuantizationState::start(const SymmetryPattern& pattern,
                                           std::vector<double> params, Strategy strategy,
                                           BatchPolicy batch) {
  QuantizationState st;
  st.repetition = pattern.repetition();
  if (params.size() != st.repetition.size())
    throw std::invalid_argument("parameter count does not match the pattern");
  st.params = std::move(params);
  st.quantized.assign(st.params.size(), false);
  st.strategy = strategy;
  st.batch = batch;
  return st;
}

std::vector<int> QuantizationState::unquantized() const {
  std::vector<int> u;
  for (std::size_t i = 0; i < quantized.size(); ++i)
    if (!quantized[i]) u.push_back(static_cast<int>(i));
  return u;
}

void QuantizationState::validate() const {
  if (quantized.size() != params.size() || repetition.size() != params.size())
    throw std::invalid_argument("quantization state vectors differ in length");
  for (int rq : repetition)
    if (rq < 1) throw std::invalid_argument("repetition quantity must be >= 1");
}

std::vector<int> priority_order(const QuantizationState& state, Rng& rng) {
  state.validate();
  std::vector<int> u = state.unquantized();
  if (state.strategy == Strategy::Random) {
    for (std::size_t i = u.size(); i > 1; --i)
      std::swap(u[i - 1], u[uniform_index(rng, i)]);
    return u;
  }
  auto key = [&](int idx) {
    const auto i = static_cast<std::size_t>(idx);
    const double v = state.params[i];
    const double rq = state.repetition[i];
    switch (state.strategy) {
      case Strategy::Pruning: return -std::abs(v);
      case Strategy::WeightedPruning: return -std::abs(v) * rq;
      case Strategy::Nearest: return nn_distance(v);
      case Strategy::WeightedNearest: return nn_distance(v) / rq;
      case Strategy::Random: break;
    }
    return 0.0;
  };
  std::vector<double> keys(state.params.size());
  for (int idx : u) keys[static_cast<std::size_t>(idx)] = key(idx);
  std::stable_sort(u.begin(), u.end(), [&](int x, int y) {
    return keys[static_cast<std::size_t>(x)] < keys[static_cast<std::size_t>(y)];
  });
  return u;
}

std::vector<int> select_batch(const QuantizationState& state, Rng& rng) {
  auto order = priority_order(state, rng);
  if (order.empty()) throw std::invalid_argument("select_batch: every parameter is quantized");
  order.resize(state.batch.size(state.total(), order.size()));
  return order;
}

bool is_closed(const TemplateSet& t, const QuantSet& qs) {
  return std::all_of(t.a.begin(), t.a.end(), [&](double v) { return qs.contains(v); }) &&
         std::all_of(t.b.begin(), t.b.end(), [&](double v) { return qs.contains(v); });
}

QuantizeResult incremental_quantize(const TemplateSet& tmpl, const TrainingTask& task,
                                    const QuantizeOptions& opts) {
  opts.qs.validate();
  if (!tmpl.pattern) throw std::invalid_argument("incremental_quantize: template has no pattern");

  TrainingTask work = task;
  work.pattern = *tmpl.pattern;
  work.frozen.clear();
  work.fixed_bias.reset();
  work.validate();

  PsoConfig cfg = opts.pso;
  if (!opts.keep_bounds) {
    const double bound = std::ldexp(1.0, opts.qs.m);
    cfg.bound_low = {-bound};
    cfg.bound_high = {bound};
  }

  QuantizeResult result;
  result.state = QuantizationState::start(work.pattern, tmpl.free_params(), opts.strategy, opts.batch);
  auto& state = result.state;

  TemplateSet current = expand_pattern(work.pattern, state.params);
  current.bias = tmpl.bias;
  current.dt = work.dt;
  result.initial_objective = work.evaluate(current);

  Rng order_rng = make_stream(opts.pso.seed, 0x5eedULL);
  int round = 0;
  while (!state.unquantized().empty()) {
    RoundRecord rec;
    rec.round = ++round;
    rec.selected = select_batch(state, order_rng);
    for (int idx : rec.selected) {
      const auto i = static_cast<std::size_t>(idx);
      rec.before.push_back(state.params[i]);
      state.params[i] = quantize_value(state.params[i], opts.qs, opts.zero_rule);
      state.quantized[i] = true;
      work.frozen[idx] = state.params[i];
      rec.after.push_back(state.params[i]);
    }
    const double bias = current.bias;
    current = expand_pattern(work.pattern, state.params);
    current.bias = bias;
    current.dt = work.dt;
    rec.objective_quantized = work.evaluate(current);
    rec.objective = rec.objective_quantized;

    if (!state.unquantized().empty()) {
      PsoConfig round_cfg = cfg;
      round_cfg.seed = mix_seed(opts.pso.seed + static_cast<std::uint64_t>(round));
      TrainResult tr = train(work, round_cfg, current);
      current = std::move(tr.best);
      rec.objective = tr.best_objective;
      const auto params = extract_params(work.pattern, current.a, current.b);
      for (int idx : state.unquantized()) {
        const auto i = static_cast<std::size_t>(idx);
        state.params[i] = params[i];
      }
    }
    state.rounds.push_back(rec);
  }

  PsoConfig bias_cfg = cfg;
  bias_cfg.seed = mix_seed(opts.pso.seed + static_cast<std::uint64_t>(round) + 1);
  TrainResult tr = retrain_bias(work, bias_cfg, current);
  result.quantized = std::move(tr.best);
  result.final_objective = tr.best_objective;
  result.rounds = state.rounds;
  if (!is_closed(result.quantized, opts.qs))
    throw std::logic_error("incremental_quantize left a parameter outside the set");
  return result;
}

}  // namespace cennq
