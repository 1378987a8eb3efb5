#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cennq/grid.hpp"
#include "cennq/template.hpp"

namespace cennq {

/// How neighbor reads outside the grid are resolved.
enum class Boundary {
  ZeroFixed,  ///< virtual cells with y = 0 and u = 0
  ZeroFlux,   ///< replicate the nearest edge cell
};

/// Initial state x(0).
enum class InitState {
  Input,  ///< x(0) = u
  Zero,   ///< x(0) = 0
};

std::string to_string(Boundary b);
std::string to_string(InitState s);
Boundary parse_boundary(const std::string& s);
InitState parse_init(const std::string& s);

/// Piecewise-linear output 0.5 * (|x + 1| - |x - 1|). Throws
/// std::invalid_argument for non-finite x.
double activation(double x);

/// One forward-Euler update:
///   x' = x + dt * (-x + I + sum A * f(x_nb) + sum B * u_nb)
/// All neighbor reads come from `state`; the result is a new grid.
/// Throws std::invalid_argument on shape mismatch and NumericalError when the
/// updated state is non-finite.
CellGrid step(const CellGrid& state, const CellGrid& input, const TemplateSet& tmpl,
              Boundary boundary = Boundary::ZeroFixed);

struct RunOptions {
  InitState init = InitState::Input;
  Boundary boundary = Boundary::ZeroFixed;
  /// Stop once max |x(n+1) - x(n)| falls below this value. Off by default so
  /// that every run performs exactly the requested number of steps.
  std::optional<double> early_stop_tol;
};

struct RunResult {
  CellGrid state;   ///< final x
  CellGrid output;  ///< f(x) elementwise
  int steps = 0;    ///< steps actually performed
};

/// Time-variant run: iteration n uses schedule[min(n, schedule.size() - 1)].
RunResult run_schedule(const CellGrid& input, std::span<const TemplateSet> schedule,
                       int iterations, const RunOptions& opts = {});

/// Applies `step` `iterations` times and returns the activated output.
CellGrid run(const CellGrid& input, const TemplateSet& tmpl, int iterations,
             const RunOptions& opts = {});

/// Arithmetic operations for `iterations` Euler steps over a width x height
/// image with square templates of side `template_size`: per cell and step
/// there are 2*s^2 + 1 multiplications and 2*s^2 + 2 additions (39 for 3x3).
/// Throws std::overflow_error when the count does not fit 64 bits.
std::uint64_t op_count(std::uint64_t width, std::uint64_t height, std::uint64_t iterations,
                       std::uint64_t template_size = 3);

}  // namespace cennq
