// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "../tests/properties.hpp"
#include "cennq/dataset.hpp"
#include "cennq/engine.hpp"
#include "cennq/hwproject.hpp"
#include "cennq/hwsim.hpp"
#include "cennq/pso.hpp"
#include "cennq/quantizer.hpp"

using namespace cennq;

namespace {

int failed = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %d. %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failed;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Nearest set element by exhaustive search; ties go to the larger magnitude.
double brute_nearest(double v, const std::vector<double>& set) {
  double best = set.front();
  for (double e : set) {
    const double d = std::abs(v - e), bd = std::abs(v - best);
    if (d < bd || (d == bd && std::abs(e) > std::abs(best))) best = e;
  }
  return best;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  long mismatches = 0, total = 0;
  for (int m = 0; m <= 4; ++m) {
    const QuantSet qs = QuantSet::symmetric(m);
    const auto set = quant_values(qs);
    Rng rng = make_stream(101, static_cast<std::uint64_t>(m));
    const double span = std::ldexp(1.0, m + 1);
    for (int i = 0; i < 10000; ++i) {
      const double v = uniform_in(rng, -span, span);
      mismatches += quantize_value(v, qs) != brute_nearest(v, set);
      ++total;
    }
    // Exact midpoints between neighbouring elements.
    for (std::size_t i = 0; i + 1 < set.size(); ++i) {
      const double mid = 0.5 * (set[i] + set[i + 1]);
      mismatches += quantize_value(mid, qs) != brute_nearest(mid, set);
      ++total;
    }
  }
  const double secs = elapsed(t0);
  report(1, "quantization rule oracle", mismatches == 0 && secs < 1.0,
         std::to_string(total) + " inputs, " + std::to_string(mismatches) + " mismatches, " +
             fmt("%.3f s", secs));
}

double brute_nn_distance(double v) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int p = -64; p <= 64; ++p) best = std::min(best, std::abs(a - std::ldexp(1.0, p)));
  return best;
}

void criterion2() {
  int mismatches = 0;
  for (int c = 0; c < 1000; ++c) {
    Rng rng = make_stream(202, static_cast<std::uint64_t>(c));
    QuantizationState st;
    const auto n = 1 + uniform_index(rng, 12);
    for (std::size_t i = 0; i < n; ++i) {
      // A coarse grid half the time so that equal keys occur.
      const double v = uniform_index(rng, 2) ? uniform_in(rng, -4, 4)
                                             : 0.25 * (static_cast<double>(uniform_index(rng, 33)) - 16);
      st.params.push_back(v);
      st.repetition.push_back(1 + static_cast<int>(uniform_index(rng, 4)));
    }
    st.quantized.assign(n, false);
    st.strategy = Strategy::WeightedNearest;
    const auto got = priority_order(st, rng);
    // Selection sort on (key, index).
    std::vector<int> expect;
    std::vector<bool> used(n, false);
    for (std::size_t r = 0; r < n; ++r) {
      int pick = -1;
      double pk = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const double k = brute_nn_distance(st.params[i]) / st.repetition[i];
        if (pick < 0 || k < pk) pick = static_cast<int>(i), pk = k;
      }
      used[static_cast<std::size_t>(pick)] = true;
      expect.push_back(pick);
    }
    mismatches += got != expect;
  }
  report(2, "WNN ordering", mismatches == 0, "1000 vectors, " + std::to_string(mismatches) + " mismatches");
}

void criterion3() {
  const int a = bit_width({-2, 2}), b = bit_width({0, 0}), c = bit_width({-4, 4});
  report(3, "bit width", a == 5 && b == 3 && c == 6,
         "(2,-2)=" + std::to_string(a) + " (0,0)=" + std::to_string(b) + " (4,-4)=" + std::to_string(c));
}

void criterion4() {
  const auto n = op_count(1920, 1080, 100);
  report(4, "operation count", n == 8087040000ULL && std::abs(static_cast<double>(n) / 1e9 - 8.1) < 0.05,
         "op_count(1920,1080,100)=" + std::to_string(n));
}

void criterion5() {
  const auto c = ShiftCoeff::pow2;
  // 3 zeros, one coefficient three times, three distinct singletons.
  const ShiftKernel k{ShiftCoeff::zero(), c(1, -1), ShiftCoeff::zero(), c(1, -1), c(-1, 1),
                      c(1, -1),           c(1, 0),  ShiftCoeff::zero(), c(1, -2)};
  const int none = build_schedule(k, {1, false, false, 3}).multiply_cycles;
  const int sparse = build_schedule(k, {1, true, false, 3}).multiply_cycles;
  const int both = build_schedule(k, {1, true, true, 3}).multiply_cycles;
  report(5, "schedule cycles", none == 9 && sparse == 6 && both == 4,
         std::to_string(none) + "/" + std::to_string(sparse) + "/" + std::to_string(both));
}

void criterion6() {
  const auto cal = Calibration::load(std::string(CENNQ_DATA_DIR) + "/fpga_calibration.json");
  bool ok = true;
  std::string detail;
  for (const auto& t : cal.tables) {
    const auto rows = project_table(cal, t);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (t.id == "5") {
        // Baselines are unpublished: no speedup without user input.
        ok = ok && !r.speedup;
        continue;
      }
      if (!r.speedup || !r.reported_speedup || r.reported_speedup == 1.0) continue;
      const bool hit = std::abs(*r.speedup - *r.reported_speedup) <= 0.15 &&
                       r.plan.stage_count == r.reported_stages.value_or(-1);
      ok = ok && hit;
      detail += fmt("%.3g/%.2g ", *r.speedup, *r.reported_speedup);
    }
  }
  report(6, "table ratios", ok, detail + "(table 5: no baseline, no speedup)");
}

TemplateSet random_quantized_template(Rng& rng) {
  const auto vals = quant_values({-2, 0});
  TemplateSet t;
  for (auto* k : {&t.a, &t.b})
    for (auto& v : *k) v = uniform_index(rng, 3) == 0 ? 0.0 : vals[uniform_index(rng, vals.size())];
  t.bias = uniform_in(rng, -1, 1);
  t.dt = std::ldexp(1.0, -static_cast<int>(uniform_index(rng, 3)));
  return t;
}

void criterion7() {
  double worst = 0.0, sensitivity = 0.0;
  int over = 0;
  for (int c = 0; c < 100; ++c) {
    Rng rng = make_stream(707, static_cast<std::uint64_t>(c));
    const TemplateSet t = random_quantized_template(rng);
    CellGrid u(8, 8);
    for (auto& v : u.values()) v = uniform_in(rng, -1, 1);
    const CellGrid ref = run(u, t, 10);
    const double d = max_abs_diff(fixed_run(u, ShiftTemplate::from_template(t), 10).output, ref);
    worst = std::max(worst, d);
    over += d > 1e-2;
    // Float engine alone, inputs moved by at most half a Q5.12 step.
    Rng jitter = make_stream(708, static_cast<std::uint64_t>(c));
    CellGrid moved = u;
    for (auto& v : moved.values()) v += uniform_in(jitter, -0x1p-13, 0x1p-13);
    sensitivity = std::max(sensitivity, max_abs_diff(run(moved, t, 10), ref));
  }
  report(7, "fixed/float equivalence", worst <= 1e-2,
         fmt("max divergence %.3g over 100 tasks, %g above 1e-2; float engine under +-2^-13 input jitter: %.3g",
             worst, over, sensitivity));
}

void criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  SynthOptions so;
  so.kind = SynthKind::Noise;
  so.size = 32;
  so.count = 2;
  so.noise_level = 0.1;
  so.seed = 8;
  TrainingTask task;
  task.pairs = synthesize(so);
  PsoConfig cfg = PsoConfig::with_range_exponent(2);
  cfg.seed = 8;
  const auto trained = train(task, cfg);

  TrainingTask reference = task;
  for (auto& p : reference.pairs) p.ideal = run(p.input, trained.best, task.iterations_per_eval, task.run);

  bool closed = true;
  double best_acc = -1.0;
  std::string best_label;
  std::uint64_t stream = 0;
  for (const auto batch : {BatchPolicy::constant(), BatchPolicy::log_scale()})
    for (const auto s : kAllStrategies) {
      QuantizeOptions qo;
      qo.qs = {-2, 2};
      qo.strategy = s;
      qo.batch = batch;
      qo.pso.seed = make_stream(8, ++stream)();
      const auto res = incremental_quantize(trained.best, reference, qo);
      closed = closed && is_closed(res.quantized, qo.qs);
      const double acc = accuracy_percent(res.final_objective, reference.pairs.size());
      std::printf("      %-5s accuracy %.2f%% (truth %.2f%%)\n", strategy_label(s, batch).c_str(), acc,
                  accuracy_percent(task.evaluate(res.quantized), task.pairs.size()));
      if (acc > best_acc) best_acc = acc, best_label = strategy_label(s, batch);
    }
  const double secs = elapsed(t0);
  const double degradation = 100.0 - best_acc;
  char detail[256];
  std::snprintf(detail, sizeof detail,
                "unquantized truth accuracy %.2f%%, best %s degradation %.2f%%, closure %s, %.0f s",
                accuracy_percent(trained.best_objective, task.pairs.size()), best_label.c_str(), degradation,
                closed ? "ok" : "violated", secs);
  report(8, "end-to-end sweep", closed && degradation <= 10.0 && secs < 600.0, detail);
}

void criterion9() {
  bool ok = true;
  std::string detail;
  for (const auto& s : props::all_suites(1000, 909)) {
    ok = ok && s.failures == 0 && s.cases >= 1000;
    detail += s.name + " " + std::to_string(s.cases - s.failures) + "/" + std::to_string(s.cases) + "; ";
    if (s.failures) detail += "(" + s.first_failure + ") ";
  }
  report(9, "invariant suites", ok, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion9();
  criterion8();
  return failed ? 1 : 0;
}
