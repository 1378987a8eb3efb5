#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cennq/cli.hpp"
#include "cennq/dataset.hpp"
#include "cennq/engine.hpp"
#include "cennq/errors.hpp"
#include "cennq/hwproject.hpp"
#include "cennq/hwsim.hpp"
#include "cennq/pso.hpp"
#include "cennq/quantizer.hpp"

namespace py = pybind11;
using namespace cennq;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

CellGrid to_grid(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return CellGrid(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const CellGrid& g) {
  Array out({g.rows(), g.cols()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

Kernel3 kernel(const std::vector<double>& v) {
  if (v.size() != 9) throw std::invalid_argument("a 3x3 template needs 9 coefficients");
  Kernel3 k{};
  std::copy(v.begin(), v.end(), k.begin());
  return k;
}

TemplateSet make_template(const std::vector<double>& a, const std::vector<double>& b, double bias, double dt) {
  TemplateSet t;
  t.a = kernel(a);
  t.b = kernel(b);
  t.bias = bias;
  t.dt = dt;
  t.validate();
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CeNN simulation, power-of-two quantization and shift-based hardware models";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericalError>(m, "NumericalError");

  m.def("quant_values", [](int k, int mx) { return quant_values({k, mx}); }, py::arg("k"), py::arg("m"));
  m.def("bit_width", [](int k, int mx) { return bit_width({k, mx}); }, py::arg("k"), py::arg("m"));
  m.def(
      "quantize_value",
      [](double v, int k, int mx, bool printed_rule) {
        return quantize_value(v, {k, mx}, printed_rule ? ZeroRule::Printed : ZeroRule::Midpoint);
      },
      py::arg("v"), py::arg("k"), py::arg("m"), py::arg("printed_rule") = false);
  m.def("nn_distance", &nn_distance, py::arg("v"));
  m.def("op_count", &op_count, py::arg("width"), py::arg("height"), py::arg("iterations"),
        py::arg("template_size") = 3);

  m.def(
      "run",
      [](const Array& input, const std::vector<double>& a, const std::vector<double>& b, double bias, double dt,
         int iterations, const std::string& boundary, const std::string& init) {
        RunOptions o{parse_init(init), parse_boundary(boundary), std::nullopt};
        return to_array(run(to_grid(input), make_template(a, b, bias, dt), iterations, o));
      },
      py::arg("input"), py::arg("a"), py::arg("b"), py::arg("bias") = 0.0, py::arg("dt") = 1.0,
      py::arg("iterations") = 20, py::arg("boundary") = "zero", py::arg("init") = "input");

  m.def(
      "fixed_run",
      [](const Array& input, const std::vector<double>& a, const std::vector<double>& b, double bias, double dt,
         int iterations, int frac_bits, int shifters, bool sparsity, bool repetition) {
        FixedRunOptions o;
        o.frac_bits = frac_bits;
        o.schedule = {shifters, sparsity, repetition, 3};
        const auto r = fixed_run(to_grid(input), ShiftTemplate::from_template(make_template(a, b, bias, dt)),
                                 iterations, o);
        return py::make_tuple(to_array(r.output), r.saturations,
                              cycles_per_pixel(r.schedule.a, r.schedule.b));
      },
      py::arg("input"), py::arg("a"), py::arg("b"), py::arg("bias") = 0.0, py::arg("dt") = 1.0,
      py::arg("iterations") = 20, py::arg("frac_bits") = kDefaultFracBits, py::arg("shifters") = 1,
      py::arg("sparsity") = false, py::arg("repetition") = false);

  m.def(
      "schedule_cycles",
      [](const std::vector<double>& coeffs, int shifters, bool sparsity, bool repetition) {
        ShiftKernel k;
        const auto v = kernel(coeffs);
        for (std::size_t i = 0; i < 9; ++i) k[i] = ShiftCoeff::from_value(v[i]);
        return build_schedule(k, {shifters, sparsity, repetition, 3}).multiply_cycles;
      },
      py::arg("coeffs"), py::arg("shifters") = 1, py::arg("sparsity") = false, py::arg("repetition") = false);

  m.def(
      "minimize",
      [](const std::function<double(std::vector<double>)>& fn, std::size_t dim, double low, double high,
         int swarm, int iterations, std::uint64_t seed) {
        PsoConfig cfg;
        cfg.bound_low = {low};
        cfg.bound_high = {high};
        cfg.swarm_size = swarm;
        cfg.iterations = iterations;
        cfg.seed = seed;
        const auto r = minimize(
            [&](std::span<const double> x) { return fn(std::vector<double>(x.begin(), x.end())); }, dim, cfg);
        return py::make_tuple(r.best_position, r.best_value, r.history);
      },
      py::arg("fn"), py::arg("dim"), py::arg("low"), py::arg("high"), py::arg("swarm") = 10,
      py::arg("iterations") = 500, py::arg("seed") = 0);

  m.def(
      "synthesize",
      [](const std::string& kind, std::size_t size, std::size_t count, double noise_level, std::uint64_t seed) {
        py::list out;
        for (const auto& p : synthesize({parse_synth_kind(kind), size, count, noise_level, seed}))
          out.append(py::make_tuple(to_array(p.input), to_array(p.ideal)));
        return out;
      },
      py::arg("kind") = "noise", py::arg("size") = 32, py::arg("count") = 1, py::arg("noise_level") = 0.1,
      py::arg("seed") = 0);

  m.def(
      "project",
      [](const std::string& calibration, const std::string& table, bool model_baseline) {
        const auto cal = Calibration::load(calibration);
        py::list out;
        for (const auto& t : cal.tables) {
          if (table != "all" && t.id != table) continue;
          for (const auto& r : project_table(cal, t, model_baseline)) {
            py::dict d;
            d["table"] = r.table;
            d["label"] = r.label;
            d["stages"] = r.plan.stage_count;
            d["le_used"] = r.plan.le_used;
            d["speedup"] = r.speedup ? py::cast(*r.speedup) : py::none();
            d["reported_speedup"] = r.reported_speedup ? py::cast(*r.reported_speedup) : py::none();
            out.append(d);
          }
        }
        return out;
      },
      py::arg("calibration") = std::string(CENNQ_DATA_DIR) + "/fpga_calibration.json", py::arg("table") = "all",
      py::arg("model_baseline") = false);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
