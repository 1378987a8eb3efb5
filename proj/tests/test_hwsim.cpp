#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cennq/hwsim.hpp"
#include "cennq/rng.hpp"

using namespace cennq;

namespace {

const ShiftCoeff Z = ShiftCoeff::zero();
ShiftCoeff c(int s, int p) { return ShiftCoeff::pow2(s, p); }

ShiftCoeff random_coeff(Rng& rng) {
  if (uniform_index(rng, 3) == 0) return Z;
  return c(uniform_index(rng, 2) ? 1 : -1, static_cast<int>(uniform_index(rng, 5)) - 2);
}

// Exact in double for dyadic operands of this size: one rounding, half up.
std::int32_t ref_update(std::int32_t x, const std::array<std::int32_t, 9>& y, const std::array<std::int32_t, 9>& u,
                        const ShiftTemplate& t, double bias_raw) {
  double sum = -x + bias_raw;
  for (std::size_t i = 0; i < 9; ++i) sum += t.a[i].value() * y[i] + t.b[i].value() * u[i];
  const double nx = x + std::floor(sum * t.dt.value() + 0.5);
  return static_cast<std::int32_t>(std::clamp(nx, double(kRawMin), double(kRawMax)));
}

}  // namespace

TEST_CASE("to_fixed and from_fixed") {
  CHECK(to_fixed(0.0).word.raw == 0);
  CHECK(to_fixed(0.5).word.raw == 2048);
  CHECK(from_fixed(to_fixed(0.5).word) == 0.5);
  const auto big = to_fixed(1000.0);
  CHECK(big.word.raw == 131071);
  CHECK(big.saturated);
  CHECK(to_fixed(-1000.0).word.raw == -131072);
  CHECK(to_fixed(0.5 / 4096).word.raw == 0);
  CHECK(to_fixed(1.5 / 4096).word.raw == 2);
  Rng rng = make_stream(3, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = uniform_in(rng, -31, 31);
    CHECK(std::abs(from_fixed(to_fixed(v).word) - v) <= std::ldexp(1.0, -13));
  }
}

TEST_CASE("shift_mul") {
  CHECK(shift_mul(to_fixed(0.75).word, c(1, -1)).word.value() == 0.375);
  CHECK(shift_mul(to_fixed(0.75).word, Z).word.raw == 0);
  const auto r = shift_mul(to_fixed(-0.625).word, c(1, 2));
  CHECK(r.word.raw == -10240);
  CHECK(r.word.value() == -2.5);
  CHECK(shift_mul(FixedWord{-3, 12}, c(1, -1)).word.raw == -2);
  const auto sat = shift_mul(to_fixed(20.0).word, c(-1, 1));
  CHECK(sat.saturated);
  CHECK(sat.word.raw == kRawMin);
}

TEST_CASE("ShiftCoeff conversions") {
  CHECK(ShiftCoeff::from_value(0.25) == c(1, -2));
  CHECK(ShiftCoeff::from_value(-4.0) == c(-1, 2));
  CHECK(ShiftCoeff::from_value(0.0).is_zero());
  CHECK_THROWS_AS(ShiftCoeff::from_value(0.3), std::invalid_argument);
  CHECK(c(-1, -3).to_string() == "-2^-3");
  TemplateSet t;
  t.dt = 0.3;
  CHECK_THROWS_AS(ShiftTemplate::from_template(t), std::invalid_argument);
  t.dt = 0.125;
  t.a[4] = 2;
  CHECK(ShiftTemplate::from_template(t).to_template().a == t.a);
}

TEST_CASE("fixed_step examples") {
  ShiftTemplate zero;
  const FixedGrid x = FixedGrid::encode(CellGrid(3, 3, 0.4), 12);
  CHECK(fixed_step(x, x, zero).state.decode() == CellGrid(3, 3, 0.0));

  ShiftTemplate t;
  t.a[4] = c(1, 1);
  const FixedGrid one = FixedGrid::encode(CellGrid(1, 1, 0.25), 12);
  const FixedGrid in = FixedGrid::encode(CellGrid(1, 1, 0.0), 12);
  CHECK(fixed_step(one, in, t).state.decode()(0, 0) == 0.5);
  CHECK_THROWS_AS(fixed_step(one, FixedGrid::encode(CellGrid(1, 2), 12), t), std::invalid_argument);
}

TEST_CASE("fixed_step against the dyadic reference") {
  for (int k = 0; k < 200; ++k) {
    Rng rng = make_stream(41, static_cast<std::uint64_t>(k));
    ShiftTemplate t;
    for (auto& v : t.a) v = random_coeff(rng);
    for (auto& v : t.b) v = random_coeff(rng);
    t.dt = c(1, -static_cast<int>(uniform_index(rng, 8)));
    t.bias = std::ldexp(static_cast<double>(uniform_index(rng, 8193)) - 4096, -12);
    const bool flux = k % 2;
    FixedGrid x{5, 4, 12, {}}, u{5, 4, 12, {}};
    for (int i = 0; i < 20; ++i) {
      x.raw.push_back(static_cast<std::int32_t>(uniform_index(rng, 40001)) - 20000);
      u.raw.push_back(static_cast<std::int32_t>(uniform_index(rng, 8193)) - 4096);
    }
    ScheduleOptions so{std::array{1, 3, 9}[uniform_index(rng, 3)], uniform_index(rng, 2) == 1,
                       uniform_index(rng, 2) == 1, 3};
    const auto got = fixed_step(x, u, t, build_stage_schedule(t, so), flux ? Boundary::ZeroFlux : Boundary::ZeroFixed);
    auto at = [&](const FixedGrid& g, long r, long cc, bool clampy) -> std::int32_t {
      if (flux) {
        r = std::clamp(r, 0L, 4L);
        cc = std::clamp(cc, 0L, 3L);
      } else if (r < 0 || r > 4 || cc < 0 || cc > 3) {
        return 0;
      }
      const std::int32_t v = g.raw[static_cast<std::size_t>(r * 4 + cc)];
      return clampy ? std::clamp(v, -4096, 4096) : v;
    };
    for (long r = 0; r < 5; ++r)
      for (long cc = 0; cc < 4; ++cc) {
        std::array<std::int32_t, 9> yw{}, uw{};
        for (long dr = -1; dr <= 1; ++dr)
          for (long dc = -1; dc <= 1; ++dc) {
            const auto i = static_cast<std::size_t>((dr + 1) * 3 + dc + 1);
            yw[i] = at(x, r + dr, cc + dc, true);
            uw[i] = at(u, r + dr, cc + dc, false);
          }
        const auto expect = ref_update(x.raw[static_cast<std::size_t>(r * 4 + cc)], yw, uw, t, t.bias * 4096);
        REQUIRE(got.state.raw[static_cast<std::size_t>(r * 4 + cc)] == expect);
      }
  }
}

TEST_CASE("saturation at write-back is counted") {
  ShiftTemplate t;
  t.bias = 30.0;
  t.a[4] = c(1, 4);
  const FixedGrid x = FixedGrid::encode(CellGrid(2, 2, 1.0), 12);
  const auto r = fixed_step(x, x, t);
  CHECK(r.saturations == 4);
  for (auto v : r.state.raw) CHECK(v == kRawMax);
}

TEST_CASE("fixed_run tracks the float engine") {
  TemplateSet t;
  t.a = {0, 0.25, 0, 0.25, 2, 0.25, 0, 0.25, 0};
  t.b = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  t.bias = -0.3;
  t.dt = 0.5;
  CellGrid u(8, 8);
  Rng rng = make_stream(9, 0);
  for (auto& v : u.values()) v = uniform_in(rng, -1, 1);
  const auto fx = fixed_run(u, ShiftTemplate::from_template(t), 10);
  CHECK(max_abs_diff(fx.output, run(u, t, 10)) <= 1e-2);
  for (double v : fx.output.values()) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("analyze_template") {
  CHECK(analyze_template(Kernel3{}).zero_count == 9);
  const auto s = analyze_template(Kernel3{0, 0.5, 0, 0.5, -2, 0.5, 1, 0, 0.25});
  CHECK(s.zero_count == 3);
  CHECK(s.nonzero_count == 6);
  CHECK(s.distinct_nonzero_count == 4);
  CHECK(s.max_repetition == 3);
  CHECK(s.repeated_count == 3);
  const auto id = analyze_template(Kernel3{0, 0, 0, 0, 1, 0, 0, 0, 0});
  CHECK(id.zero_count == 8);
  CHECK(id.nonzero_count == 1);
}

TEST_CASE("shared coefficient schedule") {
  const ShiftKernel k{Z, c(1, -1), Z, c(1, -1), c(-1, 1), c(1, -1), c(1, 0), Z, c(1, -2)};
  CHECK(build_schedule(k, {1, false, false, 3}).multiply_cycles == 9);
  CHECK(build_schedule(k, {1, true, false, 3}).multiply_cycles == 6);
  const auto both = build_schedule(k, {1, true, true, 3});
  CHECK(both.multiply_cycles == 4);
  CHECK(both.skipped_zero_count == 3);
  CHECK(both.groups.front().operands == std::vector<int>{1, 3, 5});
  CHECK(to_text(both).find("cycle 1: +2^-1 x (op1 + op3 + op5)") != std::string::npos);
  CHECK(to_json(both)["multiply_cycles"] == 4);
}

TEST_CASE("schedules with more shifters") {
  const ShiftKernel dense{c(1, 0), c(1, 1), c(1, 2), c(-1, 0), c(-1, 1), c(-1, 2), c(1, -1), c(1, -2), c(-1, -1)};
  CHECK(build_schedule(dense, {9, false, false, 3}).multiply_cycles == 1);
  CHECK(build_schedule(dense, {3, false, false, 3}).multiply_cycles == 3);
  CHECK_FALSE(build_schedule(dense, {3, true, true, 3}).repetition_applied);
  const ShiftKernel zeros{};
  CHECK(build_schedule(zeros, {1, true, false, 3}).multiply_cycles == 0);
  CHECK_THROWS_AS(build_schedule(zeros, {2, false, false, 3}), std::invalid_argument);
}

TEST_CASE("cycles per pixel") {
  const ShiftKernel fig6{Z, c(1, -1), Z, c(1, -1), c(-1, 1), c(1, -1), c(1, 0), Z, c(1, -2)};
  const ShiftKernel mirrored{c(1, 0), c(1, 1), c(1, 2), c(-1, 0), c(-1, 1), c(-1, 2), c(1, 2), c(1, 1), c(1, 0)};
  const auto naive_a = build_schedule(fig6, {1, false, false, 3});
  const auto naive_b = build_schedule(mirrored, {1, false, false, 3});
  CHECK(cycles_per_pixel(naive_a, naive_b) == 11);
  const auto opt_a = build_schedule(fig6, {1, true, true, 3});
  const auto opt_b = build_schedule(mirrored, {1, true, true, 3});
  CHECK(opt_b.multiply_cycles == 6);
  CHECK(cycles_per_pixel(opt_a, opt_b) == 8);
  const auto par_a = build_schedule(fig6, {9, false, false, 3});
  const auto par_b = build_schedule(mirrored, {9, false, false, 3});
  CHECK(cycles_per_pixel(par_a, par_b) == 1);
  CHECK(cycles_per_pixel(naive_a, naive_b, {2, ShifterPool::Shared}) == 20);
  CHECK_THROWS_AS(cycles_per_pixel(naive_a, par_b), std::invalid_argument);
}

TEST_CASE("schedule execution equals the naive sum") {
  for (int k = 0; k < 300; ++k) {
    Rng rng = make_stream(77, static_cast<std::uint64_t>(k));
    ShiftKernel kern;
    for (auto& v : kern) v = random_coeff(rng);
    std::array<std::int32_t, 9> ops{};
    for (auto& o : ops) o = static_cast<std::int32_t>(uniform_index(rng, 262144)) - 131072;
    std::int64_t expect = 0;
    for (std::size_t i = 0; i < 9; ++i)
      expect += static_cast<std::int64_t>(std::ldexp(kern[i].value() * ops[i], kGuardBits));
    for (int s : {1, 3, 9})
      for (bool sp : {false, true})
        for (bool rep : {false, true}) {
          const auto plan = build_schedule(kern, {s, sp, rep, 3});
          REQUIRE(execute_schedule(plan, ops) == expect);
        }
  }
}
