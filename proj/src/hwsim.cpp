#include "cennq/hwsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cennq {

ShiftTemplate ShiftTemplate::from_template(const TemplateSet& t) {
  t.validate(/*hardware_bound=*/true);
  ShiftTemplate s;
  for (std::size_t i = 0; i < 9; ++i) {
    s.a[i] = ShiftCoeff::from_value(t.a[i]);
    s.b[i] = ShiftCoeff::from_value(t.b[i]);
  }
  s.bias = t.bias;
  s.dt = ShiftCoeff::from_value(t.dt);
  s.validate();
  return s;
}

TemplateSet ShiftTemplate::to_template() const {
  TemplateSet t;
  for (std::size_t i = 0; i < 9; ++i) {
    t.a[i] = a[i].value();
    t.b[i] = b[i].value();
  }
  t.bias = bias;
  t.dt = dt.value();
  return t;
}

void ShiftTemplate::validate() const {
  if (dt.sign != 1 || dt.exponent < -7 || dt.exponent > 0)
    throw std::invalid_argument("S2 supports dt = 2^s with -7 <= s <= 0");
  for (const auto* k : {&a, &b})
    for (const auto& c : *k)
      if (!c.is_zero() && (c.exponent < -kGuardBits || c.exponent > 20))
        throw std::invalid_argument("S1 exponent " + std::to_string(c.exponent) + " unsupported");
  if (!std::isfinite(bias)) throw std::invalid_argument("bias must be finite");
}

// ---------------------------------------------------------------------------

SchedulePlan build_schedule(const ShiftKernel& coeffs, const ScheduleOptions& opts) {
  if (opts.shifters != 1 && opts.shifters != 3 && opts.shifters != 9)
    throw std::invalid_argument("shifter count must be 1, 3 or 9");
  if (opts.adder_fanin < 1) throw std::invalid_argument("adder fan-in must be >= 1");

  SchedulePlan plan;
  plan.shifter_count = opts.shifters;
  plan.repetition_applied = opts.repetition && opts.shifters == 1;

  std::vector<int> cells;
  for (int i = 0; i < 9; ++i) {
    if (opts.sparsity && coeffs[static_cast<std::size_t>(i)].is_zero())
      ++plan.skipped_zero_count;
    else
      cells.push_back(i);
  }

  if (plan.repetition_applied) {
    // Groups keyed by (sign, exponent), in order of first appearance.
    std::vector<std::pair<ShiftCoeff, std::vector<int>>> keyed;
    for (int i : cells) {
      const auto& c = coeffs[static_cast<std::size_t>(i)];
      auto it = std::find_if(keyed.begin(), keyed.end(), [&](const auto& g) { return g.first == c; });
      if (it == keyed.end())
        keyed.push_back({c, {i}});
      else
        it->second.push_back(i);
    }
    const auto fanin = static_cast<std::size_t>(opts.adder_fanin);
    for (auto& [c, ops] : keyed) {
      for (std::size_t s = 0; s < ops.size(); s += fanin) {
        const auto e = std::min(ops.size(), s + fanin);
        plan.groups.push_back({c, std::vector<int>(ops.begin() + static_cast<long>(s),
                                                   ops.begin() + static_cast<long>(e))});
      }
    }
  } else {
    for (int i : cells) plan.groups.push_back({coeffs[static_cast<std::size_t>(i)], {i}});
  }

  const auto issues = static_cast<int>(plan.groups.size());
  plan.multiply_cycles = (issues + opts.shifters - 1) / opts.shifters;
  return plan;
}

StageSchedule build_stage_schedule(const ShiftTemplate& t, const ScheduleOptions& opts) {
  return {build_schedule(t.a, opts), build_schedule(t.b, opts)};
}

std::int64_t execute_schedule(const SchedulePlan& plan, std::span<const std::int32_t, 9> operands) {
  std::int64_t acc = 0;
  for (const auto& g : plan.groups) {
    std::int64_t pre_sum = 0;
    for (int i : g.operands) pre_sum += operands[static_cast<std::size_t>(i)];
    acc += shift_to_accumulator(pre_sum, g.coefficient);
  }
  return acc;
}

std::int64_t naive_convolution(const ShiftKernel& coeffs, std::span<const std::int32_t, 9> operands) {
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < 9; ++i) acc += shift_to_accumulator(operands[i], coeffs[i]);
  return acc;
}

int cycles_per_pixel(const SchedulePlan& plan_a, const SchedulePlan& plan_b, const CycleModel& model) {
  if (plan_a.shifter_count != plan_b.shifter_count)
    throw std::invalid_argument("cycles_per_pixel: plans use different shifter counts");
  if (model.overhead < 0) throw std::invalid_argument("cycle overhead must be >= 0");
  const int shifters = plan_a.shifter_count;
  if (shifters == 9 && model.pool == ShifterPool::PerUnit) return 1;
  int multiply = 0;
  if (model.pool == ShifterPool::PerUnit) {
    multiply = std::max(plan_a.multiply_cycles, plan_b.multiply_cycles);
  } else {
    const auto issues = static_cast<int>(plan_a.groups.size() + plan_b.groups.size());
    multiply = (issues + shifters - 1) / shifters;
  }
  return multiply + model.overhead;
}

std::string to_text(const SchedulePlan& plan) {
  std::ostringstream os;
  os << "shifters=" << plan.shifter_count << " multiply_cycles=" << plan.multiply_cycles
     << " skipped_zeros=" << plan.skipped_zero_count
     << " repetition=" << (plan.repetition_applied ? "on" : "off") << '\n';
  for (std::size_t i = 0; i < plan.groups.size(); ++i) {
    const auto& g = plan.groups[i];
    os << "  cycle " << i / static_cast<std::size_t>(plan.shifter_count) + 1 << ": "
       << g.coefficient.to_string() << " x (";
    for (std::size_t j = 0; j < g.operands.size(); ++j) os << (j ? " + " : "") << "op" << g.operands[j];
    os << ")\n";
  }
  return os.str();
}

nlohmann::json to_json(const SchedulePlan& plan) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : plan.groups) {
    nlohmann::json coeff = g.coefficient.is_zero()
                               ? nlohmann::json{{"sign", 0}, {"p", nullptr}}
                               : nlohmann::json{{"sign", g.coefficient.sign}, {"p", g.coefficient.exponent}};
    groups.push_back({{"coefficient", coeff}, {"operands", g.operands}});
  }
  return {{"shifters", plan.shifter_count},
          {"multiply_cycles", plan.multiply_cycles},
          {"skipped_zero_count", plan.skipped_zero_count},
          {"repetition_applied", plan.repetition_applied},
          {"groups", groups}};
}

// ---------------------------------------------------------------------------

FixedGrid FixedGrid::encode(const CellGrid& g, int frac_bits, std::size_t* saturations) {
  FixedGrid f{g.rows(), g.cols(), frac_bits, {}};
  f.raw.reserve(g.size());
  for (double v : g.values()) {
    const auto r = to_fixed(v, frac_bits);
    if (r.saturated && saturations) ++*saturations;
    f.raw.push_back(r.word.raw);
  }
  return f;
}

CellGrid FixedGrid::decode() const {
  CellGrid g(rows, cols);
  auto v = g.values();
  for (std::size_t i = 0; i < raw.size(); ++i) v[i] = from_fixed({raw[i], frac_bits});
  return g;
}

namespace {

// Integer plane with a one-cell halo, as in the floating engine.
class RawHalo {
 public:
  RawHalo(const FixedGrid& src, Boundary boundary, std::int32_t clamp_to)
      : rows_(src.rows), cols_(src.cols), stride_(src.cols + 2), data_((src.rows + 2) * (src.cols + 2), 0) {
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) {
        std::int32_t v = src.raw[r * cols_ + c];
        if (clamp_to > 0) v = std::clamp(v, -clamp_to, clamp_to);
        data_[(r + 1) * stride_ + c + 1] = v;
      }
    if (boundary == Boundary::ZeroFixed) return;
    for (std::size_t r = 1; r <= rows_; ++r) {
      data_[r * stride_] = data_[r * stride_ + 1];
      data_[r * stride_ + cols_ + 1] = data_[r * stride_ + cols_];
    }
    for (std::size_t c = 0; c < stride_; ++c) {
      data_[c] = data_[stride_ + c];
      data_[(rows_ + 1) * stride_ + c] = data_[rows_ * stride_ + c];
    }
  }

  std::array<std::int32_t, 9> window(std::size_t r, std::size_t c) const {
    std::array<std::int32_t, 9> w{};
    for (std::size_t dr = 0; dr < 3; ++dr)
      for (std::size_t dc = 0; dc < 3; ++dc) w[dr * 3 + dc] = data_[(r + dr) * stride_ + c + dc];
    return w;
  }

 private:
  std::size_t rows_, cols_, stride_;
  std::vector<std::int32_t> data_;
};

}  // namespace

FixedStepResult fixed_step(const FixedGrid& state, const FixedGrid& input, const ShiftTemplate& t,
                           const StageSchedule& schedule, Boundary boundary) {
  if (!state.same_shape(input) || state.raw.size() != state.rows * state.cols ||
      input.raw.size() != input.rows * input.cols)
    throw std::invalid_argument("fixed_step: state and input grids differ in shape");
  if (state.frac_bits != input.frac_bits)
    throw std::invalid_argument("fixed_step: state and input use different binary points");
  t.validate();

  const int frac = state.frac_bits;
  const std::int32_t one = std::int32_t{1} << frac;
  FixedStepResult out{{state.rows, state.cols, frac, std::vector<std::int32_t>(state.raw.size())}, 0};

  const auto bias_word = to_fixed(t.bias, frac);
  if (bias_word.saturated) ++out.saturations;
  const std::int64_t bias_acc = std::int64_t{bias_word.word.raw} << kGuardBits;
  const std::int64_t acc_limit = (std::int64_t{1} << (kAccumulatorBits - 1)) - 1;
  const int down = kGuardBits - t.dt.exponent;  // S2 shift plus guard removal
  const std::int64_t half = std::int64_t{1} << (down - 1);

  const RawHalo y(state, boundary, one);  // f(x) is a clamp to [-1, 1]
  const RawHalo u(input, boundary, 0);
  for (std::size_t r = 0; r < state.rows; ++r) {
    for (std::size_t c = 0; c < state.cols; ++c) {
      const std::int64_t x = state.raw[r * state.cols + c];
      const auto yw = y.window(r, c);
      const auto uw = u.window(r, c);
      std::int64_t acc = -(x << kGuardBits) + bias_acc + execute_schedule(schedule.a, yw) +
                         execute_schedule(schedule.b, uw);
      if (acc > acc_limit || acc < -acc_limit) {
        acc = std::clamp(acc, -acc_limit, acc_limit);
        ++out.saturations;
      }
      const std::int64_t delta = (acc + half) >> down;  // round half up
      std::int64_t nx = x + delta;
      if (nx > kRawMax || nx < kRawMin) {
        nx = std::clamp<std::int64_t>(nx, kRawMin, kRawMax);
        ++out.saturations;
      }
      out.state.raw[r * state.cols + c] = static_cast<std::int32_t>(nx);
    }
  }
  return out;
}

FixedStepResult fixed_step(const FixedGrid& state, const FixedGrid& input, const ShiftTemplate& t,
                           Boundary boundary) {
  return fixed_step(state, input, t, build_stage_schedule(t, {}), boundary);
}

FixedRunResult fixed_run(const CellGrid& input, const ShiftTemplate& t, int iterations,
                         const FixedRunOptions& opts) {
  if (iterations < 1) throw std::invalid_argument("fixed_run: iterations must be >= 1");
  FixedRunResult out;
  out.schedule = build_stage_schedule(t, opts.schedule);
  const FixedGrid u = FixedGrid::encode(input, opts.frac_bits, &out.saturations);
  FixedGrid x = opts.init == InitState::Input
                    ? u
                    : FixedGrid{u.rows, u.cols, u.frac_bits, std::vector<std::int32_t>(u.raw.size(), 0)};
  for (int n = 0; n < iterations; ++n) {
    auto r = fixed_step(x, u, t, out.schedule, opts.boundary);
    out.saturations += r.saturations;
    x = std::move(r.state);
  }
  out.state = x.decode();
  const std::int32_t one = std::int32_t{1} << opts.frac_bits;
  for (auto& v : x.raw) v = std::clamp(v, -one, one);
  out.output = x.decode();
  return out;
}

TemplateStats analyze_template(const Kernel3& t) {
  TemplateStats s;
  std::map<double, int> counts;
  for (double v : t) {
    if (v == 0.0) {
      ++s.zero_count;
    } else {
      ++s.nonzero_count;
      ++counts[v];
    }
  }
  s.distinct_nonzero_count = static_cast<int>(counts.size());
  for (const auto& [v, n] : counts) {
    s.max_repetition = std::max(s.max_repetition, n);
    if (n > 1) s.repeated_count += n;
  }
  return s;
}

}  // namespace cennq
