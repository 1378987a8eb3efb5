#include "cennq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cennq/errors.hpp"

namespace cennq {

namespace {

// Copy of a plane surrounded by a one-cell halo resolved per boundary policy.
class HaloPlane {
 public:
  HaloPlane(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(cols + 2), data_((rows + 2) * (cols + 2), 0.0) {}

  template <class F>
  void fill(F&& value_at, Boundary boundary) {
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) at(r + 1, c + 1) = value_at(r, c);
    if (boundary == Boundary::ZeroFixed) return;  // halo stays zero
    for (std::size_t r = 1; r <= rows_; ++r) {
      at(r, 0) = at(r, 1);
      at(r, cols_ + 1) = at(r, cols_);
    }
    for (std::size_t c = 0; c < stride_; ++c) {
      at(0, c) = at(1, c);
      at(rows_ + 1, c) = at(rows_, c);
    }
  }

  // Weighted 3x3 sum centered on interior cell (r, c).
  double correlate(const Kernel3& k, std::size_t r, std::size_t c, double acc) const {
    const double* top = &data_[r * stride_ + c];
    const double* mid = top + stride_;
    const double* bot = mid + stride_;
    acc += k[0] * top[0];
    acc += k[1] * top[1];
    acc += k[2] * top[2];
    acc += k[3] * mid[0];
    acc += k[4] * mid[1];
    acc += k[5] * mid[2];
    acc += k[6] * bot[0];
    acc += k[7] * bot[1];
    acc += k[8] * bot[2];
    return acc;
  }

 private:
  double& at(std::size_t r, std::size_t c) { return data_[r * stride_ + c]; }

  std::size_t rows_, cols_, stride_;
  std::vector<double> data_;
};

void check_shapes(const CellGrid& state, const CellGrid& input) {
  if (!state.same_shape(input))
    throw std::invalid_argument("state and input grids differ in shape");
}

// I + sum B * u, which stays constant while the template does.
std::vector<double> feedforward(const CellGrid& input, const TemplateSet& t, Boundary boundary) {
  HaloPlane u(input.rows(), input.cols());
  u.fill([&](std::size_t r, std::size_t c) { return input(r, c); }, boundary);
  std::vector<double> feed(input.size());
  for (std::size_t r = 0; r < input.rows(); ++r)
    for (std::size_t c = 0; c < input.cols(); ++c)
      feed[r * input.cols() + c] = u.correlate(t.b, r, c, t.bias);
  return feed;
}

// Writes the Euler update into `next` and returns max |next - state|.
double advance(const CellGrid& state, const std::vector<double>& feed, const TemplateSet& t,
               Boundary boundary, CellGrid& next) {
  HaloPlane y(state.rows(), state.cols());
  y.fill([&](std::size_t r, std::size_t c) { return activation(state(r, c)); }, boundary);
  double delta = 0.0;
  bool finite = true;
  for (std::size_t r = 0; r < state.rows(); ++r) {
    for (std::size_t c = 0; c < state.cols(); ++c) {
      const double x = state(r, c);
      const double acc = y.correlate(t.a, r, c, -x + feed[r * state.cols() + c]);
      const double nx = x + t.dt * acc;
      finite = finite && std::isfinite(nx);
      delta = std::max(delta, std::abs(nx - x));
      next(r, c) = nx;
    }
  }
  if (!finite) throw NumericalError("CeNN state diverged to a non-finite value");
  return delta;
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::ZeroFixed ? "zero" : "flux"; }

std::string to_string(InitState s) { return s == InitState::Input ? "input" : "zero"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "zero" || s == "fixed") return Boundary::ZeroFixed;
  if (s == "flux" || s == "replicate") return Boundary::ZeroFlux;
  throw std::invalid_argument("unknown boundary policy '" + s + "'");
}

InitState parse_init(const std::string& s) {
  if (s == "input") return InitState::Input;
  if (s == "zero") return InitState::Zero;
  throw std::invalid_argument("unknown init policy '" + s + "'");
}

double activation(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("activation: non-finite input");
  return 0.5 * (std::abs(x + 1.0) - std::abs(x - 1.0));
}

CellGrid step(const CellGrid& state, const CellGrid& input, const TemplateSet& tmpl,
              Boundary boundary) {
  check_shapes(state, input);
  CellGrid next(state.rows(), state.cols());
  advance(state, feedforward(input, tmpl, boundary), tmpl, boundary, next);
  return next;
}

RunResult run_schedule(const CellGrid& input, std::span<const TemplateSet> schedule,
                       int iterations, const RunOptions& opts) {
  if (iterations < 1) throw std::invalid_argument("run: iterations must be >= 1");
  if (schedule.empty()) throw std::invalid_argument("run: empty template schedule");
  if (input.empty()) throw std::invalid_argument("run: empty input grid");
  for (const auto& t : schedule) t.validate();

  CellGrid state = opts.init == InitState::Input ? input : CellGrid(input.rows(), input.cols());
  CellGrid next(input.rows(), input.cols());
  const TemplateSet* current = nullptr;
  std::vector<double> feed;
  int steps = 0;
  for (int n = 0; n < iterations; ++n) {
    const auto& t = schedule[std::min<std::size_t>(static_cast<std::size_t>(n), schedule.size() - 1)];
    if (current == nullptr || !(*current == t)) {
      feed = feedforward(input, t, opts.boundary);
      current = &t;
    }
    const double delta = advance(state, feed, t, opts.boundary, next);
    std::swap(state, next);
    ++steps;
    if (opts.early_stop_tol && delta < *opts.early_stop_tol) break;
  }

  RunResult out{state, CellGrid(state.rows(), state.cols()), steps};
  auto xs = out.state.values();
  auto ys = out.output.values();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = activation(xs[i]);
  return out;
}

CellGrid run(const CellGrid& input, const TemplateSet& tmpl, int iterations,
             const RunOptions& opts) {
  return run_schedule(input, std::span<const TemplateSet>(&tmpl, 1), iterations, opts).output;
}

std::uint64_t op_count(std::uint64_t width, std::uint64_t height, std::uint64_t iterations,
                       std::uint64_t template_size) {
  if (width == 0 || height == 0 || iterations == 0 || template_size == 0)
    throw std::invalid_argument("op_count: dimensions must be positive");
  if (template_size % 2 == 0) throw std::invalid_argument("op_count: template size must be odd");
  auto mul = [](std::uint64_t x, std::uint64_t y) {
    std::uint64_t r;
    if (__builtin_mul_overflow(x, y, &r)) throw std::overflow_error("op_count overflows 64 bits");
    return r;
  };
  const std::uint64_t area = mul(template_size, template_size);
  const std::uint64_t per_cell = mul(4, area) + 3;
  return mul(mul(mul(width, height), per_cell), iterations);
}

}  // namespace cennq
