#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "cennq/quantizer.hpp"

using namespace cennq;

namespace {

double brute_nearest(double v, const std::vector<double>& set) {
  double best = set.front();
  for (double e : set) {
    const double d = std::abs(v - e), bd = std::abs(v - best);
    if (d < bd || (d == bd && std::abs(e) > std::abs(best))) best = e;
  }
  return best;
}

TrainingTask small_task() {
  TrainingTask task;
  CellGrid in(6, 6, -1.0);
  for (std::size_t r = 1; r < 4; ++r)
    for (std::size_t c = 2; c < 5; ++c) in(r, c) = 1.0;
  task.pairs.push_back({in, in});
  task.iterations_per_eval = 6;
  return task;
}

}  // namespace

TEST_CASE("quant_values") {
  CHECK(quant_values({-1, 1}) == std::vector<double>{-2, -1, -0.5, 0, 0.5, 1, 2});
  CHECK(quant_values({0, 0}) == std::vector<double>{-1, 0, 1});
  CHECK(quant_values({-2, 2}).size() == 11);
  CHECK_THROWS_AS(quant_values({3, 1}), std::invalid_argument);
}

TEST_CASE("bit_width") {
  CHECK(bit_width({-2, 2}) == 5);
  CHECK(bit_width({0, 0}) == 3);
  CHECK(bit_width({-4, 4}) == 6);
  for (int m = 0; m <= 6; ++m) {
    const int levels = 2 * (2 * m + 1) + 1;
    int bits = 0;
    while ((1 << bits) < levels) ++bits;
    CHECK(bit_width(QuantSet::symmetric(m)) == bits + 1);
  }
}

TEST_CASE("quantize_value examples") {
  const QuantSet qs{-2, 2};
  CHECK(quantize_value(5.0, qs) == 4.0);
  CHECK(quantize_value(-5.0, qs) == -4.0);
  CHECK(quantize_value(0.7, qs) == 0.5);
  CHECK(quantize_value(0.0, qs) == 0.0);
  CHECK(quantize_value(0.75, qs) == 1.0);
  CHECK(quantize_value(0.12, qs) == 0.0);
  CHECK(quantize_value(0.125, qs) == 0.25);
  CHECK(quantize_value(0.9, qs, ZeroRule::Printed) == 0.0);
  CHECK(quantize_value(2.5, qs, ZeroRule::Printed) == 2.0);
  CHECK_THROWS_AS(quantize_value(NAN, qs), std::invalid_argument);
}

TEST_CASE("quantize_value against exhaustive search") {
  for (int m = 0; m <= 4; ++m) {
    const auto qs = QuantSet::symmetric(m);
    const auto set = quant_values(qs);
    Rng rng = make_stream(31, static_cast<std::uint64_t>(m));
    for (int i = 0; i < 2000; ++i) {
      const double v = uniform_in(rng, -8, 8);
      REQUIRE(quantize_value(v, qs) == brute_nearest(v, set));
    }
  }
}

TEST_CASE("nn_distance") {
  CHECK(nn_distance(0.7) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(nn_distance(0.9) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(nn_distance(0.5) == 0.0);
  CHECK(nn_distance(-0.7) == nn_distance(0.7));
  CHECK(nn_distance(0.0) == 0.0);
  CHECK(nn_distance(0.75) == 0.25);
}

TEST_CASE("WNN picks the repeated parameter") {
  QuantizationState st;
  st.params = {0.7, 0.9};
  st.repetition = {1, 3};
  st.quantized = {false, false};
  st.strategy = Strategy::WeightedNearest;
  Rng rng = make_stream(0, 0);
  CHECK(priority_order(st, rng) == std::vector<int>{1, 0});
  st.strategy = Strategy::Pruning;
  CHECK(priority_order(st, rng) == std::vector<int>{1, 0});
  st.params = {0.9, 0.7};
  st.repetition = {1, 4};
  st.strategy = Strategy::WeightedPruning;
  CHECK(priority_order(st, rng) == std::vector<int>{1, 0});
}

TEST_CASE("ordering ties keep index order") {
  QuantizationState st;
  st.params = {0.5, -2.0, 1.0, 0.0};
  st.repetition = {1, 1, 1, 1};
  st.quantized = {false, false, false, false};
  st.strategy = Strategy::Nearest;
  Rng rng = make_stream(0, 0);
  CHECK(priority_order(st, rng) == std::vector<int>{0, 1, 2, 3});
  st.quantized[1] = true;
  st.batch = BatchPolicy::constant(0.5);
  CHECK(select_batch(st, rng) == std::vector<int>{0, 2});
}

TEST_CASE("single pending parameter") {
  for (auto s : kAllStrategies) {
    QuantizationState st;
    st.params = {0.3, 1.7, -0.2};
    st.repetition = {2, 1, 1};
    st.quantized = {true, false, true};
    st.strategy = s;
    Rng rng = make_stream(1, 0);
    CHECK(select_batch(st, rng) == std::vector<int>{1});
    st.quantized[1] = true;
    CHECK_THROWS_AS(select_batch(st, rng), std::invalid_argument);
  }
}

TEST_CASE("random strategy is a permutation") {
  QuantizationState st;
  st.params.assign(12, 0.3);
  st.repetition.assign(12, 1);
  st.quantized.assign(12, false);
  st.strategy = Strategy::Random;
  Rng rng = make_stream(2, 0);
  auto order = priority_order(st, rng);
  std::sort(order.begin(), order.end());
  std::vector<int> all(12);
  std::iota(all.begin(), all.end(), 0);
  CHECK(order == all);
}

TEST_CASE("batch schedules") {
  CHECK(batch_schedule(10, BatchPolicy::constant()) == std::vector<std::size_t>{2, 2, 2, 2, 2});
  CHECK(batch_schedule(10, BatchPolicy::log_scale()) == std::vector<std::size_t>{5, 3, 1, 1});
  CHECK(batch_schedule(9, BatchPolicy::log_scale()) == std::vector<std::size_t>{5, 2, 1, 1});
  CHECK(batch_schedule(5, BatchPolicy::constant()) == std::vector<std::size_t>(5, 1));
  for (std::size_t n = 1; n <= 40; ++n)
    for (auto b : {BatchPolicy::constant(), BatchPolicy::log_scale()}) {
      const auto s = batch_schedule(n, b);
      CHECK(std::accumulate(s.begin(), s.end(), std::size_t{0}) == n);
    }
  CHECK(strategy_label(Strategy::WeightedNearest, BatchPolicy::constant()) == "WNN-C");
  CHECK(parse_strategy("PI") == Strategy::Pruning);
  CHECK_THROWS_AS(parse_batch("X"), std::invalid_argument);
}

TEST_CASE("incremental quantization rounds") {
  const TrainingTask task = small_task();
  TemplateSet t = expand_pattern(SymmetryPattern::segmentation(),
                                 std::vector<double>{0.1, -0.3, 0.2, 0.7, 1.9, 0, 0.3, 0.1, -0.6, 1.2});
  t.dt = task.dt;
  QuantizeOptions o;
  o.pso.iterations = 5;
  o.pso.swarm_size = 4;
  o.batch = BatchPolicy::log_scale();
  const auto r = incremental_quantize(t, task, o);
  CHECK(r.rounds.size() == 4);
  std::size_t done = 0;
  std::vector<std::size_t> growth;
  for (const auto& rec : r.rounds) {
    done += rec.selected.size();
    growth.push_back(done);
  }
  CHECK(growth == std::vector<std::size_t>{5, 8, 9, 10});
  CHECK(is_closed(r.quantized, o.qs));
  CHECK(r.final_objective <= r.rounds.back().objective);
}

TEST_CASE("five parameters, constant batches") {
  TrainingTask task = small_task();
  SymmetryPattern five{"five", {0, 1, 0, 1, 2, 1, 0, 1, 0}, {3, 3, 3, 3, 4, 3, 3, 3, 3}, 5};
  task.pattern = five;
  TemplateSet t = expand_pattern(five, std::vector<double>{0.3, 0.6, 1.4, -0.2, 0.9});
  t.dt = task.dt;
  QuantizeOptions o;
  o.pso.iterations = 4;
  o.pso.swarm_size = 3;
  o.batch = BatchPolicy::constant();
  const auto r = incremental_quantize(t, task, o);
  REQUIRE(r.rounds.size() == 5);
  for (const auto& rec : r.rounds) CHECK(rec.selected.size() == 1);
  CHECK(is_closed(r.quantized, o.qs));
}

TEST_CASE("already quantized template is unchanged") {
  const TrainingTask task = small_task();
  const std::vector<double> p{0.25, -0.5, 0, 1, 2, 0, 0.5, 0, -1, 4};
  TemplateSet t = expand_pattern(SymmetryPattern::segmentation(), p);
  t.dt = task.dt;
  QuantizeOptions o;
  o.pso.iterations = 3;
  o.pso.swarm_size = 3;
  const auto r = incremental_quantize(t, task, o);
  const auto& first = r.rounds.front();
  CHECK(first.before == first.after);
  for (std::size_t i = 0; i < first.selected.size(); ++i)
    CHECK(first.after[i] == p[static_cast<std::size_t>(first.selected[i])]);
  CHECK(first.objective_quantized == doctest::Approx(r.initial_objective));
}

TEST_CASE("is_closed") {
  TemplateSet t;
  t.a[4] = 0.5;
  CHECK(is_closed(t, {-2, 2}));
  t.b[0] = 0.3;
  CHECK_FALSE(is_closed(t, {-2, 2}));
  t.b[0] = 8.0;
  CHECK_FALSE(is_closed(t, {-2, 2}));
}
