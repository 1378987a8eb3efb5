#include "cennq/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cennq/dataset.hpp"
#include "cennq/engine.hpp"
#include "cennq/errors.hpp"
#include "cennq/hwproject.hpp"
#include "cennq/hwsim.hpp"
#include "cennq/pgm.hpp"
#include "cennq/quantizer.hpp"

namespace cennq {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

ExperimentConfig ExperimentConfig::from_json(const json& j, ExperimentConfig c) {
  try {
    c.manifest = j.value("manifest", c.manifest);
    c.pattern = j.value("pattern", c.pattern);
    c.strategies = j.value("strategies", c.strategies);
    c.batches = j.value("batches", c.batches);
    c.m_values = j.value("m_values", c.m_values);
    c.train_range = j.value("train_range", c.train_range);
    c.eval_iterations = j.value("eval_iterations", c.eval_iterations);
    c.dt = j.value("dt", c.dt);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.format = j.value("format", c.format);
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("pso")) {
      const auto& p = j.at("pso");
      c.swarm_size = p.value("swarm_size", c.swarm_size);
      c.pso_iterations = p.value("iterations", c.pso_iterations);
      c.inertia = p.value("inertia", c.inertia);
      c.accel_personal = p.value("c1", c.accel_personal);
      c.accel_global = p.value("c2", c.accel_global);
      c.threads = p.value("threads", c.threads);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

void ExperimentConfig::validate(bool need_manifest) const {
  if (need_manifest) {
    if (manifest.empty()) throw std::invalid_argument("--manifest is required");
    if (!fs::exists(manifest)) throw DataError("manifest '" + manifest + "' does not exist");
  }
  (void)SymmetryPattern::named(pattern);
  for (const auto& s : strategies) (void)parse_strategy(s);
  for (const auto& b : batches) (void)parse_batch(b);
  for (int m : m_values)
    if (m < 0 || m > 20) throw std::invalid_argument("m values must lie in [0, 20]");
  if (eval_iterations < 1) throw std::invalid_argument("eval iterations must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (jobs < 1 || threads < 1) throw std::invalid_argument("jobs and threads must be >= 1");
  pso(train_range).validate(1);
}

PsoConfig ExperimentConfig::pso(int range_exponent) const {
  PsoConfig p = PsoConfig::with_range_exponent(range_exponent);
  p.swarm_size = swarm_size;
  p.iterations = pso_iterations;
  p.inertia = inertia;
  p.accel_personal = accel_personal;
  p.accel_global = accel_global;
  p.seed = seed;
  p.threads = threads;
  return p;
}

ordered_json ReportRow::to_json() const {
  return {{"label", label},
          {"strategy", strategy},
          {"batch", batch},
          {"m", m},
          {"k", k},
          {"bits", bits},
          {"objective", objective},
          {"accuracy", accuracy},
          {"truth_objective", truth_objective},
          {"truth_accuracy", truth_accuracy},
          {"rounds", rounds},
          {"closed", closed},
          {"wall_time", wall_time}};
}

namespace {

std::string cell_text(const ordered_json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_null()) return "";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  return v.dump();
}

// Streams rows to stdout and, optionally, a file. csv and json flush per row;
// "table" buffers and aligns on finish.
class RowWriter {
 public:
  RowWriter(std::ostream& out, std::string format, const std::optional<fs::path>& file)
      : out_(out), format_(std::move(format)) {
    if (file) {
      file_.open(*file);
      if (!file_) throw DataError("cannot write " + file->string());
    }
  }

  void write(const ordered_json& row) {
    if (format_ == "table") {
      rows_.push_back(row);
    } else {
      emit(out_, row, format_);
    }
    if (file_.is_open()) emit(file_, row, format_ == "json" ? "json" : "csv");
    ++count_;
  }

  void finish() {
    if (format_ == "table") print_table();
    if (format_ == "json") out_ << (count_ ? "\n]\n" : "[]\n");
    if (file_.is_open()) file_ << (format_ == "json" ? (count_ ? "\n]\n" : "[]\n") : "");
    out_.flush();
  }

 private:
  void emit(std::ostream& os, const ordered_json& row, const std::string& fmt) {
    const bool first = count_ == 0;
    if (fmt == "json") {
      os << (first ? "[\n  " : ",\n  ") << row.dump();
    } else {
      if (first) {
        bool sep = false;
        for (const auto& [k, v] : row.items()) os << (std::exchange(sep, true) ? "," : "") << k;
        os << '\n';
      }
      bool sep = false;
      for (const auto& [k, v] : row.items()) os << (std::exchange(sep, true) ? "," : "") << cell_text(v);
      os << '\n';
    }
    os.flush();
  }

  void print_table() {
    if (rows_.empty()) return;
    std::vector<std::string> keys;
    for (const auto& [k, v] : rows_.front().items()) keys.push_back(k);
    std::vector<std::size_t> width(keys.size());
    std::vector<std::vector<std::string>> cells;
    for (std::size_t c = 0; c < keys.size(); ++c) width[c] = keys[c].size();
    for (const auto& r : rows_) {
      std::vector<std::string> line;
      for (std::size_t c = 0; c < keys.size(); ++c) {
        line.push_back(r.contains(keys[c]) ? cell_text(r.at(keys[c])) : "");
        width[c] = std::max(width[c], line.back().size());
      }
      cells.push_back(std::move(line));
    }
    auto print = [&](const std::vector<std::string>& line) {
      for (std::size_t c = 0; c < line.size(); ++c)
        out_ << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << line[c];
      out_ << '\n';
    };
    print(keys);
    for (const auto& line : cells) print(line);
  }

  std::ostream& out_;
  std::string format_;
  std::ofstream file_;
  std::vector<ordered_json> rows_;
  std::size_t count_ = 0;
};

std::optional<fs::path> out_file(const ExperimentConfig& cfg, const std::string& stem) {
  if (cfg.out.empty()) return std::nullopt;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw DataError("cannot create " + cfg.out + ": " + ec.message());
  return fs::path(cfg.out) / (stem + (cfg.format == "json" ? ".json" : ".csv"));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct RunFlags {
  std::string boundary = "zero";
  std::string init = "input";

  RunOptions options() const { return {parse_init(init), parse_boundary(boundary), std::nullopt}; }
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--boundary", f.boundary, "zero or flux")->capture_default_str();
  sub->add_option("--init", f.init, "initial state: input or zero")->capture_default_str();
}

TrainingTask make_task(const ExperimentConfig& cfg, std::vector<TrainingPair> pairs, const RunFlags& rf) {
  TrainingTask task;
  task.pairs = std::move(pairs);
  task.pattern = SymmetryPattern::named(cfg.pattern);
  task.iterations_per_eval = cfg.eval_iterations;
  task.dt = cfg.dt;
  task.run = rf.options();
  task.validate();
  return task;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string kind = "noise";
  std::size_t size = 32;
  std::size_t count = 2;
  double noise_level = 0.1;
};

int cmd_synth(const ExperimentConfig& cfg, const SynthArgs& a, std::ostream& out) {
  if (cfg.out.empty()) throw std::invalid_argument("synth-data needs --out <dir>");
  SynthOptions so{parse_synth_kind(a.kind), a.size, a.count, a.noise_level, cfg.seed};
  const auto pairs = synthesize(so);
  const json meta{{"kind", a.kind}, {"size", a.size}, {"noise_level", a.noise_level}, {"seed", cfg.seed}};
  const auto manifest = write_dataset(cfg.out, pairs, a.kind, meta);
  const auto entries = read_manifest(manifest);
  RowWriter w(out, cfg.format, std::nullopt);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::size_t diff = 0;
    for (std::size_t j = 0; j < pairs[i].input.size(); ++j)
      diff += pairs[i].input.values()[j] != pairs[i].ideal.values()[j];
    w.write(ordered_json{{"index", i}, {"input", entries[i].input}, {"ideal", entries[i].ideal},
                         {"differing_pixels", diff}, {"manifest", manifest.string()}});
  }
  w.finish();
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const RunFlags& rf, const std::string& save, std::ostream& out) {
  cfg.validate(true);
  const auto t0 = std::chrono::steady_clock::now();
  TrainingTask task = make_task(cfg, load_pairs(cfg.manifest), rf);
  const auto tr = train(task, cfg.pso(cfg.train_range));
  fs::path path = save;
  if (path.empty()) path = cfg.out.empty() ? fs::path("template.json") : fs::path(cfg.out) / "template.json";
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_template(path, tr.best);
  if (!cfg.out.empty()) {
    std::ofstream h(fs::path(cfg.out) / "train_history.csv");
    h << "iteration,objective\n";
    for (std::size_t i = 0; i < tr.history.size(); ++i) h << i + 1 << ',' << tr.history[i] << '\n';
  }
  RowWriter w(out, cfg.format, out_file(cfg, "train"));
  w.write(ordered_json{{"pattern", cfg.pattern},
                       {"pairs", task.pairs.size()},
                       {"objective", tr.best_objective},
                       {"accuracy", accuracy_percent(tr.best_objective, task.pairs.size())},
                       {"bias", tr.best.bias},
                       {"reinitialized", tr.reinitialized},
                       {"template", path.string()},
                       {"wall_time", seconds_since(t0)}});
  w.finish();
  return kExitOk;
}

struct SweepItem {
  Strategy strategy;
  BatchPolicy batch;
  int m;
  std::uint64_t stream;
};

int cmd_quantize(const ExperimentConfig& cfg, const RunFlags& rf, const std::string& template_path,
                 std::ostream& out) {
  cfg.validate(true);
  if (template_path.empty()) throw std::invalid_argument("quantize needs --template <file>");
  TemplateSet tmpl = load_template(template_path);
  if (!tmpl.pattern) tmpl.pattern = SymmetryPattern::named(cfg.pattern);
  try {
    (void)extract_params(*tmpl.pattern, tmpl.a, tmpl.b);
  } catch (const std::invalid_argument& e) {
    throw DataError(template_path + ": " + e.what());
  }
  ExperimentConfig run_cfg = cfg;
  run_cfg.pattern = tmpl.pattern->name;
  run_cfg.dt = tmpl.dt;
  const TrainingTask truth = make_task(run_cfg, load_pairs(cfg.manifest), rf);
  // The unquantized template's outputs serve as the ideals.
  TrainingTask reference = truth;
  for (auto& p : reference.pairs) p.ideal = run(p.input, tmpl, truth.iterations_per_eval, truth.run);

  std::vector<SweepItem> items;
  for (const auto& s : cfg.strategies) {
    const Strategy st = parse_strategy(s);
    const auto si = static_cast<std::uint64_t>(std::find(std::begin(kAllStrategies), std::end(kAllStrategies), st) -
                                               std::begin(kAllStrategies));
    for (const auto& b : cfg.batches) {
      const BatchPolicy bp = parse_batch(b);
      for (int m : cfg.m_values) {
        const std::uint64_t stream =
            si * 1000 + (bp.kind == BatchPolicy::Kind::Constant ? 0 : 100) + static_cast<std::uint64_t>(m);
        items.push_back({st, bp, m, stream});
      }
    }
  }

  fs::path template_dir;
  if (!cfg.out.empty()) {
    template_dir = fs::path(cfg.out) / "templates";
    fs::create_directories(template_dir);
  }

  auto run_item = [&](const SweepItem& it) {
    const auto t0 = std::chrono::steady_clock::now();
    QuantizeOptions qo;
    qo.qs = QuantSet::symmetric(it.m);
    qo.strategy = it.strategy;
    qo.batch = it.batch;
    qo.pso = cfg.pso(it.m);
    qo.pso.seed = make_stream(cfg.seed, it.stream)();
    const auto res = incremental_quantize(tmpl, reference, qo);
    ReportRow r;
    r.label = strategy_label(it.strategy, it.batch);
    r.strategy = to_string(it.strategy);
    r.batch = it.batch.suffix();
    r.m = it.m;
    r.k = qo.qs.k;
    r.bits = qo.qs.bit_width();
    r.objective = res.final_objective;
    r.accuracy = accuracy_percent(r.objective, reference.pairs.size());
    r.truth_objective = truth.evaluate(res.quantized);
    r.truth_accuracy = accuracy_percent(r.truth_objective, truth.pairs.size());
    r.rounds = static_cast<int>(res.rounds.size());
    r.closed = is_closed(res.quantized, qo.qs);
    if (!template_dir.empty())
      save_template(template_dir / (r.label + "_m" + std::to_string(it.m) + ".json"), res.quantized);
    r.wall_time = seconds_since(t0);
    return r;
  };

  RowWriter w(out, cfg.format, out_file(cfg, "report"));
  std::vector<std::future<ReportRow>> pending;
  std::size_t next = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    while (next < items.size() && next < i + static_cast<std::size_t>(cfg.jobs)) {
      const auto& it = items[next++];
      pending.push_back(std::async(cfg.jobs > 1 ? std::launch::async : std::launch::deferred, run_item, it));
    }
    w.write(pending[i].get().to_json());
  }
  w.finish();
  return kExitOk;
}

struct ImageArgs {
  std::string template_path;
  std::string manifest;
  std::string input;
  std::string ideal;
  std::string output;
  int iterations = 20;
};

std::vector<TrainingPair> image_pairs(const ImageArgs& a, const ExperimentConfig& cfg) {
  if (!a.manifest.empty() || !cfg.manifest.empty())
    return load_pairs(a.manifest.empty() ? cfg.manifest : a.manifest);
  if (a.input.empty()) throw std::invalid_argument("need --manifest or --input");
  TrainingPair p{read_pgm(a.input), {}};
  p.ideal = a.ideal.empty() ? CellGrid{} : read_pgm(a.ideal);
  if (!p.ideal.empty() && !p.ideal.same_shape(p.input)) throw DataError("input and ideal differ in size");
  return {p};
}

int cmd_run(const ExperimentConfig& cfg, const RunFlags& rf, const ImageArgs& a, std::ostream& out) {
  if (a.template_path.empty()) throw std::invalid_argument("run needs --template <file>");
  if (a.iterations < 1) throw std::invalid_argument("--iterations must be >= 1");
  const TemplateSet t = load_template(a.template_path);
  const auto pairs = image_pairs(a, cfg);
  RowWriter w(out, cfg.format, out_file(cfg, "run"));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const CellGrid y = run(pairs[i].input, t, a.iterations, rf.options());
    if (!a.output.empty() && pairs.size() == 1) write_pgm(a.output, y);
    ordered_json row{{"index", i}};
    if (!pairs[i].ideal.empty()) {
      const double obj = objective(y, pairs[i].ideal);
      row["objective"] = obj;
      row["accuracy"] = accuracy_percent(obj, 1);
    }
    w.write(row);
  }
  w.finish();
  return kExitOk;
}

struct FixedArgs {
  int frac_bits = kDefaultFracBits;
  int shifters = 1;
  bool sparsity = false;
  bool repetition = false;
};

int cmd_fixed_run(const ExperimentConfig& cfg, const RunFlags& rf, const ImageArgs& a, const FixedArgs& f,
                  std::ostream& out) {
  if (a.template_path.empty()) throw std::invalid_argument("fixed-run needs --template <file>");
  if (a.iterations < 1) throw std::invalid_argument("--iterations must be >= 1");
  const TemplateSet t = load_template(a.template_path);
  ShiftTemplate st;
  try {
    st = ShiftTemplate::from_template(t);
  } catch (const std::invalid_argument& e) {
    throw DataError(a.template_path + ": " + e.what());
  }
  FixedRunOptions fo;
  fo.frac_bits = f.frac_bits;
  fo.init = parse_init(rf.init);
  fo.boundary = parse_boundary(rf.boundary);
  fo.schedule = {f.shifters, f.sparsity, f.repetition, 3};
  const auto pairs = image_pairs(a, cfg);
  RowWriter w(out, cfg.format, out_file(cfg, "fixed_run"));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto r = fixed_run(pairs[i].input, st, a.iterations, fo);
    const CellGrid ref = run(pairs[i].input, t, a.iterations, rf.options());
    if (!a.output.empty() && pairs.size() == 1) write_pgm(a.output, r.output);
    ordered_json row{{"index", i}};
    if (!pairs[i].ideal.empty()) {
      const double obj = objective(r.output, pairs[i].ideal);
      row["objective"] = obj;
      row["accuracy"] = accuracy_percent(obj, 1);
    }
    row["float_divergence"] = max_abs_diff(r.output, ref);
    row["saturations"] = r.saturations;
    row["a_cycles"] = r.schedule.a.multiply_cycles;
    row["b_cycles"] = r.schedule.b.multiply_cycles;
    row["cycles_per_pixel"] = cycles_per_pixel(r.schedule.a, r.schedule.b);
    w.write(row);
  }
  w.finish();
  return kExitOk;
}

std::vector<fs::path> template_files(const std::vector<std::string>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".json") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.emplace_back(p);
    } else {
      throw DataError("'" + p + "' does not exist");
    }
  }
  if (files.empty()) throw DataError("no template files found");
  return files;
}

int cmd_analyze(const ExperimentConfig& cfg, const std::vector<std::string>& paths, bool histogram,
                std::ostream& out) {
  const auto files = template_files(paths);
  std::vector<std::pair<std::string, TemplateStats>> kernels;
  for (const auto& f : files) {
    const TemplateSet t = load_template(f);
    kernels.emplace_back(f.stem().string() + ":A", analyze_template(t.a));
    kernels.emplace_back(f.stem().string() + ":B", analyze_template(t.b));
  }
  RowWriter w(out, cfg.format, out_file(cfg, histogram ? "analyze_histogram" : "analyze"));
  if (!histogram) {
    for (const auto& [name, s] : kernels)
      w.write(ordered_json{{"template", name},
                           {"zeros", s.zero_count},
                           {"nonzeros", s.nonzero_count},
                           {"distinct_nonzeros", s.distinct_nonzero_count},
                           {"max_repetition", s.max_repetition},
                           {"repeated", s.repeated_count}});
  } else {
    std::array<int, 10> nonzero{}, repeated{};
    for (const auto& [name, s] : kernels) {
      ++nonzero[static_cast<std::size_t>(s.nonzero_count)];
      ++repeated[static_cast<std::size_t>(s.repeated_count)];
    }
    const double n = static_cast<double>(kernels.size());
    for (std::size_t c = 0; c < 10; ++c)
      w.write(ordered_json{{"count", c},
                           {"templates_with_nonzeros", nonzero[c]},
                           {"nonzero_fraction", nonzero[c] / n},
                           {"templates_with_repeated", repeated[c]},
                           {"repeated_fraction", repeated[c] / n}});
  }
  w.finish();
  return kExitOk;
}

struct ProjectArgs {
  std::string calibration = std::string(CENNQ_DATA_DIR) + "/fpga_calibration.json";
  std::string table = "all";
  bool model_baseline = false;
  std::vector<int> baseline_stages;
  int m = 5;
};

int cmd_project(const ExperimentConfig& cfg, const ProjectArgs& a, std::ostream& out) {
  Calibration cal = Calibration::load(a.calibration);
  RowWriter w(out, cfg.format, out_file(cfg, "project"));
  bool any = false;
  for (auto& t : cal.tables) {
    if (a.table != "all" && a.table != t.id) continue;
    any = true;
    for (auto& col : t.columns) col.options.m = a.m;
    if (!a.baseline_stages.empty()) {
      if (a.baseline_stages.size() != t.columns.size())
        throw std::invalid_argument("--baseline-stages needs one value per column of table " + t.id);
      for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (!t.columns[i].baseline_column) t.columns[i].baseline_stages = a.baseline_stages[i];
    }
    for (const auto& r : project_table(cal, t, a.model_baseline)) {
      ordered_json row{{"table", r.table},
                       {"implementation", r.label},
                       {"stages", r.plan.stage_count},
                       {"reported_stages", r.reported_stages ? json(*r.reported_stages) : json(nullptr)},
                       {"le_k", r.plan.le_used / 1000.0},
                       {"le_pct", 100.0 * r.le_fraction},
                       {"registers_k", r.plan.reg_used / 1000.0},
                       {"registers_pct", 100.0 * r.reg_fraction},
                       {"multipliers", r.plan.mults_used},
                       {"shifters", r.plan.shifters_used},
                       {"clock_mhz", r.plan.clock_mhz},
                       {"cycles_per_pixel", r.plan.cycles_per_pixel},
                       {"speedup", r.speedup ? json(*r.speedup) : json(nullptr)},
                       {"reported_speedup", r.reported_speedup ? json(*r.reported_speedup) : json(nullptr)},
                       {"feasible", !r.plan.infeasible}};
      w.write(row);
    }
  }
  w.finish();
  if (!any) throw std::invalid_argument("no table '" + a.table + "' in the calibration file");
  return kExitOk;
}

struct BenchArgs {
  std::size_t size = 64;
  int iterations = 20;
  int repeat = 3;
};

int cmd_bench(const ExperimentConfig& cfg, const BenchArgs& a, std::ostream& out) {
  if (a.size < 1 || a.iterations < 1 || a.repeat < 1)
    throw std::invalid_argument("bench sizes must be positive");
  SynthOptions so;
  so.size = std::max<std::size_t>(a.size, 8);
  so.seed = cfg.seed;
  const CellGrid u = synthesize(so).front().input;
  TemplateSet t;
  t.a[4] = 2.0;
  t.b = {0.25, 0.25, 0.25, 0.25, 1.0, 0.25, 0.25, 0.25, 0.25};
  t.bias = -0.5;
  t.dt = 0.5;
  const ShiftTemplate st = ShiftTemplate::from_template(t);
  const double ops = static_cast<double>(op_count(u.cols(), u.rows(), static_cast<std::uint64_t>(a.iterations)));
  RowWriter w(out, cfg.format, out_file(cfg, "bench"));
  for (const std::string engine : {"float", "fixed"}) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < a.repeat; ++r) {
      if (engine == "float")
        (void)run(u, t, a.iterations);
      else
        (void)fixed_run(u, st, a.iterations);
    }
    const double s = seconds_since(t0) / a.repeat;
    w.write(ordered_json{{"engine", engine},
                         {"size", so.size},
                         {"iterations", a.iterations},
                         {"seconds", s},
                         {"cell_updates_per_second", static_cast<double>(u.size()) * a.iterations / s},
                         {"op_count", ops}});
  }
  w.finish();
  return kExitOk;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  RunFlags rf;
  SynthArgs synth;
  ImageArgs img;
  FixedArgs fixed;
  ProjectArgs proj;
  BenchArgs bench;
  std::string template_path, save_path, config_path;
  std::vector<std::string> analyze_paths;
  bool histogram = false;

  try {
    if (auto path = find_config(args)) {
      std::ifstream in(*path);
      if (!in) throw DataError("cannot open config '" + *path + "'");
      try {
        cfg = ExperimentConfig::from_json(json::parse(in), ExperimentConfig{});
      } catch (const json::parse_error& e) {
        throw DataError(*path + ": " + e.what());
      }
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  CLI::App app{"CeNN simulation, training, power-of-two quantization and hardware projection"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--format", cfg.format, "csv, json or table")
      ->check(CLI::IsMember({"csv", "json", "table"}))
      ->capture_default_str();

  auto* s_synth = app.add_subcommand("synth-data", "generate synthetic image pairs and a manifest");
  s_synth->add_option("--kind", synth.kind, "noise, edge or detect")->capture_default_str();
  s_synth->add_option("--size", synth.size, "image side")->capture_default_str();
  s_synth->add_option("--count", synth.count, "number of pairs")->capture_default_str();
  s_synth->add_option("--noise-level", synth.noise_level, "flipped pixel fraction")->capture_default_str();

  auto add_experiment = [&](CLI::App* s) {
    s->add_option("--manifest", cfg.manifest, "image pair manifest");
    s->add_option("--pattern", cfg.pattern, "symmetry pattern")->capture_default_str();
    s->add_option("--eval-iterations", cfg.eval_iterations, "Euler steps per evaluation")->capture_default_str();
    s->add_option("--swarm", cfg.swarm_size, "particles")->capture_default_str();
    s->add_option("--pso-iterations", cfg.pso_iterations, "swarm iterations")->capture_default_str();
    s->add_option("--threads", cfg.threads, "objective evaluation threads")->capture_default_str();
    add_run_flags(s, rf);
  };

  auto* s_train = app.add_subcommand("train", "train a template with PSO");
  add_experiment(s_train);
  s_train->add_option("--dt", cfg.dt, "Euler step")->capture_default_str();
  s_train->add_option("--range", cfg.train_range, "search bounds [-2^m, 2^m]")->capture_default_str();
  s_train->add_option("--save", save_path, "template output file");

  auto* s_quant = app.add_subcommand("quantize", "incremental quantization sweep");
  add_experiment(s_quant);
  s_quant->add_option("--template", template_path, "trained template")->required();
  s_quant->add_option("--strategies", cfg.strategies, "RAN PI WPI NN WNN")->delimiter(',');
  s_quant->add_option("--batches", cfg.batches, "C L")->delimiter(',');
  s_quant->add_option("--m", cfg.m_values, "set sizes (k = -m)")->delimiter(',');
  s_quant->add_option("--jobs", cfg.jobs, "rows run concurrently")->capture_default_str();

  auto add_image = [&](CLI::App* s) {
    s->add_option("--template", img.template_path, "template file")->required();
    s->add_option("--manifest", img.manifest, "image pair manifest");
    s->add_option("--input", img.input, "input PGM");
    s->add_option("--ideal", img.ideal, "ideal PGM");
    s->add_option("--output", img.output, "output PGM (single input only)");
    s->add_option("--iterations", img.iterations, "Euler steps")->capture_default_str();
    add_run_flags(s, rf);
  };
  auto* s_run = app.add_subcommand("run", "simulate a template in floating point");
  add_image(s_run);
  auto* s_fixed = app.add_subcommand("fixed-run", "simulate the shift-based fixed-point pipeline");
  add_image(s_fixed);
  s_fixed->add_option("--frac-bits", fixed.frac_bits, "fractional bits")->capture_default_str();
  s_fixed->add_option("--shifters", fixed.shifters, "shifters per convolution unit")
      ->check(CLI::IsMember({1, 3, 9}))
      ->capture_default_str();
  s_fixed->add_flag("--sparsity", fixed.sparsity, "skip zero coefficients");
  s_fixed->add_flag("--repetition", fixed.repetition, "pre-sum repeated coefficients");

  auto* s_analyze = app.add_subcommand("analyze", "sparsity and repetition statistics of templates");
  s_analyze->add_option("paths", analyze_paths, "template files or directories")->required();
  s_analyze->add_flag("--histogram", histogram, "aggregate counts instead of per-template rows");

  auto* s_project = app.add_subcommand("project", "FPGA stage-count and speedup projection");
  s_project->add_option("--calibration", proj.calibration, "calibration JSON")->capture_default_str();
  s_project->add_option("--table", proj.table, "3, 4, 5 or all")->capture_default_str();
  s_project->add_option("--m", proj.m, "shifter size S1(m)")->capture_default_str();
  s_project->add_flag("--model-baseline", proj.model_baseline,
                      "estimate missing baselines with a multiplier-only plan");
  s_project->add_option("--baseline-stages", proj.baseline_stages, "user-supplied baseline stage counts")
      ->delimiter(',');

  auto* s_bench = app.add_subcommand("bench", "time the floating and fixed-point engines");
  s_bench->add_option("--size", bench.size, "grid side")->capture_default_str();
  s_bench->add_option("--iterations", bench.iterations, "Euler steps")->capture_default_str();
  s_bench->add_option("--repeat", bench.repeat, "repetitions")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      const auto subs = app.get_subcommands();
      out << (subs.empty() ? app.help() : subs.front()->help());
      return kExitOk;
    }
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (s_synth->parsed()) return cmd_synth(cfg, synth, out);
    if (s_train->parsed()) return cmd_train(cfg, rf, save_path, out);
    if (s_quant->parsed()) return cmd_quantize(cfg, rf, template_path, out);
    if (s_run->parsed()) return cmd_run(cfg, rf, img, out);
    if (s_fixed->parsed()) return cmd_fixed_run(cfg, rf, img, fixed, out);
    if (s_analyze->parsed()) return cmd_analyze(cfg, analyze_paths, histogram, out);
    if (s_project->parsed()) return cmd_project(cfg, proj, out);
    if (s_bench->parsed()) return cmd_bench(cfg, bench, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cennq
