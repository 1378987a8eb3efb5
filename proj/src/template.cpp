#include "cennq/template.hpp"

#include <cmath>
#include <stdexcept>

namespace cennq {

void SymmetryPattern::validate() const {
  if (free_count < 1) throw std::invalid_argument("pattern free_count must be >= 1");
  std::vector<bool> used(static_cast<std::size_t>(free_count), false);
  for (const auto* layout : {&a_layout, &b_layout}) {
    for (int idx : *layout) {
      if (idx < 0 || idx >= free_count)
        throw std::invalid_argument("pattern index " + std::to_string(idx) +
                                    " outside [0, " + std::to_string(free_count) + ")");
      used[static_cast<std::size_t>(idx)] = true;
    }
  }
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i])
      throw std::invalid_argument("pattern parameter " + std::to_string(i) + " is never used");
}

std::vector<int> SymmetryPattern::repetition() const {
  std::vector<int> rq(static_cast<std::size_t>(free_count), 0);
  for (int idx : a_layout) ++rq.at(static_cast<std::size_t>(idx));
  for (int idx : b_layout) ++rq.at(static_cast<std::size_t>(idx));
  return rq;
}

SymmetryPattern SymmetryPattern::segmentation() {
  return {"segmentation", {0, 1, 2, 3, 4, 3, 2, 1, 0}, {5, 6, 7, 8, 9, 8, 7, 6, 5}, 10};
}

SymmetryPattern SymmetryPattern::obstacle() {
  return {"obstacle", {0, 0, 0, 0, 1, 0, 0, 0, 0}, {2, 2, 2, 2, 3, 2, 2, 2, 2}, 4};
}

SymmetryPattern SymmetryPattern::isotropic() {
  return {"isotropic", {0, 1, 0, 1, 2, 1, 0, 1, 0}, {3, 4, 3, 4, 5, 4, 3, 4, 3}, 6};
}

SymmetryPattern SymmetryPattern::full() {
  SymmetryPattern p{"full", {}, {}, 18};
  for (int i = 0; i < 9; ++i) {
    p.a_layout[static_cast<std::size_t>(i)] = i;
    p.b_layout[static_cast<std::size_t>(i)] = 9 + i;
  }
  return p;
}

SymmetryPattern SymmetryPattern::named(const std::string& name) {
  if (name == "segmentation") return segmentation();
  if (name == "obstacle") return obstacle();
  if (name == "isotropic") return isotropic();
  if (name == "full") return full();
  throw std::invalid_argument("unknown pattern '" + name + "'");
}

bool is_hardware_step(double dt) {
  for (int s = -7; s <= 0; ++s)
    if (dt == std::ldexp(1.0, s)) return true;
  return false;
}

void TemplateSet::validate(bool hardware_bound) const {
  for (double v : a)
    if (!std::isfinite(v)) throw std::invalid_argument("template A has a non-finite entry");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("template B has a non-finite entry");
  if (!std::isfinite(bias)) throw std::invalid_argument("template bias is not finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("template dt must be > 0");
  if (hardware_bound && !is_hardware_step(dt))
    throw std::invalid_argument("hardware execution needs dt = 2^s with -7 <= s <= 0");
  if (pattern) {
    pattern->validate();
    (void)extract_params(*pattern, a, b);
  }
}

std::vector<double> TemplateSet::free_params() const {
  if (!pattern) throw std::invalid_argument("template has no symmetry pattern");
  return extract_params(*pattern, a, b);
}

TemplateSet expand_pattern(const SymmetryPattern& pattern, std::span<const double> params) {
  pattern.validate();
  if (params.size() != static_cast<std::size_t>(pattern.free_count))
    throw std::invalid_argument("expand_pattern: expected " + std::to_string(pattern.free_count) +
                                " parameters, got " + std::to_string(params.size()));
  TemplateSet t;
  for (std::size_t i = 0; i < 9; ++i) {
    t.a[i] = params[static_cast<std::size_t>(pattern.a_layout[i])];
    t.b[i] = params[static_cast<std::size_t>(pattern.b_layout[i])];
  }
  t.pattern = pattern;
  return t;
}

std::vector<double> extract_params(const SymmetryPattern& pattern, const Kernel3& a,
                                   const Kernel3& b) {
  pattern.validate();
  std::vector<double> params(static_cast<std::size_t>(pattern.free_count), 0.0);
  std::vector<bool> seen(params.size(), false);
  auto take = [&](int idx, double v) {
    auto i = static_cast<std::size_t>(idx);
    if (!seen[i]) {
      params[i] = v;
      seen[i] = true;
    } else if (params[i] != v) {
      throw std::invalid_argument("template is inconsistent with pattern '" + pattern.name +
                                  "' at parameter " + std::to_string(idx));
    }
  };
  for (std::size_t i = 0; i < 9; ++i) take(pattern.a_layout[i], a[i]);
  for (std::size_t i = 0; i < 9; ++i) take(pattern.b_layout[i], b[i]);
  return params;
}

}  // namespace cennq
