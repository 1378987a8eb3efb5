#include "cennq/hwproject.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cennq/errors.hpp"

namespace cennq {

ResourceCosts ResourceCosts::defaults() {
  ResourceCosts c;
  c.le_per_shifter = {{"S1(0)", 39}, {"S1(1)", 44}, {"S1(2)", 50}, {"S1(3)", 80},
                      {"S1(4)", 109}, {"S1(5)", 105}, {"S2(7)", 80}};
  c.reg_per_shifter = {{"S1(0)", 39}, {"S1(1)", 42}, {"S1(2)", 45}, {"S1(3)", 47},
                       {"S1(4)", 50}, {"S1(5)", 52}, {"S2(7)", 75}};
  return c;
}

int ResourceCosts::shifter_le(int m) const {
  auto it = le_per_shifter.find(s1_key(m));
  if (it == le_per_shifter.end()) throw std::invalid_argument("no LE cost for " + s1_key(m));
  return it->second;
}

int ResourceCosts::shifter_reg(int m) const {
  auto it = reg_per_shifter.find(s1_key(m));
  if (it == reg_per_shifter.end()) throw std::invalid_argument("no register cost for " + s1_key(m));
  return it->second;
}

void ResourceCosts::validate() const {
  if (le_per_multiplier <= 0 || reg_per_multiplier <= 0 || adder_le <= 0)
    throw std::invalid_argument("resource costs must be positive");
  for (const auto* m : {&le_per_shifter, &reg_per_shifter})
    for (const auto& [k, v] : *m)
      if (v <= 0) throw std::invalid_argument("shifter cost " + k + " must be positive");
}

void FpgaBudget::validate() const {
  if (total_le < 0 || total_registers < 0 || embedded_multipliers < 0)
    throw std::invalid_argument("FPGA capacities must be non-negative");
  if (!(le_utilization_cap > 0.0) || le_utilization_cap > 1.0)
    throw std::invalid_argument("utilization cap must lie in (0, 1]");
}

void StageConfig::validate() const {
  if (elements != 1 && elements != 3 && elements != 9)
    throw std::invalid_argument("stage elements must be 1, 3 or 9");
  if (units < 1) throw std::invalid_argument("stage needs at least one convolution unit");
  if (multiplier_stage.le <= 0 || multiplier_stage.registers <= 0 || multiplier_stage.multipliers <= 0)
    throw std::invalid_argument("multiplier stage costs must be positive");
  if (shifter_stage.le <= 0 || shifter_stage.registers <= 0 || shifter_stage.multipliers < 0)
    throw std::invalid_argument("shifter stage costs must be positive");
  if (repetition_le < 0 || repetition_registers < 0)
    throw std::invalid_argument("repetition overhead must be non-negative");
}

StageCost StageConfig::shifter_cost(const ResourceCosts& costs, int m) const {
  const long n = static_cast<long>(units) * elements;
  StageCost c = shifter_stage;
  c.le += n * (costs.shifter_le(m) - costs.shifter_le(calibration_m));
  c.registers += n * (costs.shifter_reg(m) - costs.shifter_reg(calibration_m));
  if (c.le <= 0 || c.registers <= 0)
    throw std::invalid_argument("shifter stage cost at S1(" + std::to_string(m) + ") is not positive");
  return c;
}

StagePlan max_stages(const FpgaBudget& budget, const ResourceCosts& costs,
                     const StageConfig& config, const StageOptions& opts) {
  budget.validate();
  costs.validate();
  config.validate();

  StagePlan plan;
  const double le_cap = budget.le_cap();
  const double reg_cap = budget.reg_cap();
  auto fits = [&](const StageCost& c) {
    return static_cast<double>(plan.le_used + c.le) <= le_cap &&
           static_cast<double>(plan.reg_used + c.registers) <= reg_cap &&
           plan.mults_used + c.multipliers <= budget.embedded_multipliers;
  };
  auto add = [&](const StageCost& c) {
    plan.le_used += c.le;
    plan.reg_used += c.registers;
    plan.mults_used += c.multipliers;
    ++plan.stage_count;
  };

  StageCost mult = config.multiplier_stage;
  StageCost shift = config.shifter_cost(costs, opts.m);
  if (opts.repetition) {
    mult.le += config.repetition_le;
    mult.registers += config.repetition_registers;
    shift.le += config.repetition_le;
    shift.registers += config.repetition_registers;
  }
  while (fits(mult)) {
    add(mult);
    ++plan.multiplier_stages;
  }
  if (opts.shifters) {
    while (fits(shift)) {
      add(shift);
      ++plan.shifter_stages;
    }
  }
  plan.shifters_used = static_cast<long>(plan.shifter_stages) * config.units * config.elements;
  plan.infeasible = plan.stage_count == 0;
  return plan;
}

double equivalent_capacity(const StagePlan& plan) {
  if (plan.cycles_per_pixel <= 0) throw std::invalid_argument("cycles per pixel must be positive");
  return plan.stage_count * plan.clock_mhz / plan.cycles_per_pixel;
}

double speedup(const StagePlan& ours, const StagePlan& baseline, bool ignore_clock) {
  if (ours.cycles_per_pixel <= 0 || baseline.cycles_per_pixel <= 0)
    throw std::invalid_argument("cycles per pixel must be positive");
  const double num = static_cast<double>(ours.stage_count) / ours.cycles_per_pixel;
  const double den = static_cast<double>(baseline.stage_count) / baseline.cycles_per_pixel;
  if (den == 0.0) throw std::invalid_argument("baseline capacity is zero");
  if (ignore_clock) return num / den;
  if (baseline.clock_mhz <= 0.0) throw std::invalid_argument("baseline capacity is zero");
  return num * ours.clock_mhz / (den * baseline.clock_mhz);
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

StageCost cost_from(const json& j) {
  return {j.at("le").get<long>(), j.at("registers").get<long>(), j.value("multipliers", 0L)};
}

}  // namespace

Calibration Calibration::from_json(const json& j) {
  try {
    Calibration c;
    c.version = j.at("version").get<int>();
    c.source = j.value("source", "");
    c.costs = ResourceCosts::defaults();
    if (j.contains("costs")) {
      const auto& k = j.at("costs");
      if (k.contains("le_per_shifter")) c.costs.le_per_shifter = k.at("le_per_shifter").get<std::map<std::string, int>>();
      if (k.contains("reg_per_shifter")) c.costs.reg_per_shifter = k.at("reg_per_shifter").get<std::map<std::string, int>>();
      c.costs.le_per_multiplier = k.value("le_per_multiplier", c.costs.le_per_multiplier);
      c.costs.reg_per_multiplier = k.value("reg_per_multiplier", c.costs.reg_per_multiplier);
      c.costs.adder_le = k.value("adder_le", c.costs.adder_le);
    }
    c.costs.validate();
    for (const auto& [name, d] : j.at("devices").items()) {
      FpgaBudget b{name, d.at("le").get<long>(), d.at("registers").get<long>(),
                   d.at("multipliers").get<long>(), d.value("cap", 0.8)};
      b.validate();
      c.devices[name] = b;
    }
    for (const auto& [name, s] : j.at("configs").items()) {
      StageConfig sc;
      sc.name = name;
      sc.elements = s.at("elements").get<int>();
      sc.units = s.value("units", 2);
      sc.multiplier_stage = cost_from(s.at("multiplier_stage"));
      sc.shifter_stage = cost_from(s.at("shifter_stage"));
      sc.calibration_m = s.value("calibration_m", 5);
      sc.repetition_le = s.value("repetition_le", 0L);
      sc.repetition_registers = s.value("repetition_registers", 0L);
      sc.validate();
      c.configs[name] = sc;
    }
    for (const auto& t : j.value("tables", json::array())) {
      ProjectionTable pt{t.at("id").get<std::string>(), t.value("title", ""), {}};
      for (const auto& col : t.at("columns")) {
        ProjectionColumn pc;
        pc.label = col.at("label").get<std::string>();
        pc.device = col.at("device").get<std::string>();
        pc.config = col.at("config").get<std::string>();
        pc.options.shifters = col.value("shifters", true);
        pc.options.repetition = col.value("repetition", false);
        pc.options.m = col.value("m", 5);
        pc.clock_mhz = col.value("clock_mhz", 0.0);
        pc.cycles_per_pixel = col.value("cycles_per_pixel", 1);
        pc.baseline_column = opt<int>(col, "baseline_column");
        pc.reported_stages = opt<int>(col, "reported_stages");
        pc.reported_speedup = opt<double>(col, "reported_speedup");
        pc.baseline_stages = opt<int>(col, "baseline_stages");
        if (!c.devices.contains(pc.device)) throw DataError("unknown device " + pc.device);
        if (!c.configs.contains(pc.config)) throw DataError("unknown stage config " + pc.config);
        pt.columns.push_back(pc);
      }
      c.tables.push_back(std::move(pt));
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("calibration: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("calibration: ") + e.what());
  }
}

Calibration Calibration::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

const FpgaBudget& Calibration::device(const std::string& name) const {
  auto it = devices.find(name);
  if (it == devices.end()) throw std::invalid_argument("unknown device " + name);
  return it->second;
}

const StageConfig& Calibration::config(const std::string& name) const {
  auto it = configs.find(name);
  if (it == configs.end()) throw std::invalid_argument("unknown stage config " + name);
  return it->second;
}

std::vector<ProjectionRow> project_table(const Calibration& cal, const ProjectionTable& table,
                                         bool model_baseline) {
  std::vector<ProjectionRow> rows;
  for (const auto& col : table.columns) {
    const auto& dev = cal.device(col.device);
    ProjectionRow r;
    r.table = table.id;
    r.label = col.label;
    r.plan = max_stages(dev, cal.costs, cal.config(col.config), col.options);
    r.plan.clock_mhz = col.clock_mhz;
    r.plan.cycles_per_pixel = col.cycles_per_pixel;
    r.le_fraction = dev.total_le ? static_cast<double>(r.plan.le_used) / dev.total_le : 0.0;
    r.reg_fraction = dev.total_registers ? static_cast<double>(r.plan.reg_used) / dev.total_registers : 0.0;
    r.reported_stages = col.reported_stages;
    r.reported_speedup = col.reported_speedup;
    rows.push_back(r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& col = table.columns[i];
    auto& r = rows[i];
    if (r.plan.infeasible) continue;
    std::optional<StagePlan> base;
    if (col.baseline_column) {
      const auto b = static_cast<std::size_t>(*col.baseline_column);
      if (b >= rows.size()) throw std::invalid_argument("baseline column out of range");
      base = rows[b].plan;
    } else if (col.baseline_stages) {
      base = r.plan;
      base->stage_count = *col.baseline_stages;
    } else if (model_baseline) {
      StageOptions o = col.options;
      o.shifters = false;
      base = max_stages(cal.device(col.device), cal.costs, cal.config(col.config), o);
      base->clock_mhz = col.clock_mhz;
      base->cycles_per_pixel = col.cycles_per_pixel;
    }
    if (base && !base->infeasible) r.speedup = speedup(r.plan, *base, /*ignore_clock=*/true);
  }
  return rows;
}

}  // namespace cennq
