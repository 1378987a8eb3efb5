#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cennq {

/// 3x3 coefficient template, row-major. Entry (r, c) weighs the neighbor at
/// offset (r - 1, c - 1) from the cell being updated.
using Kernel3 = std::array<double, 9>;

constexpr std::size_t kernel_index(int dr, int dc) {
  return static_cast<std::size_t>((dr + 1) * 3 + (dc + 1));
}

/// Maps template positions to shared free parameters. Cells carrying the same
/// index are coupled and always hold identical values.
struct SymmetryPattern {
  std::string name;
  std::array<int, 9> a_layout{};
  std::array<int, 9> b_layout{};
  int free_count = 0;

  /// Throws std::invalid_argument unless every index lies in
  /// [0, free_count) and every free parameter is used at least once.
  void validate() const;

  /// Repetition quantity per free parameter: number of template cells (A and
  /// B together) that the parameter occupies.
  std::vector<int> repetition() const;

  /// A = {a0,a1,a2; a3,a4,a3; a2,a1,a0}, B likewise over a5..a9.
  static SymmetryPattern segmentation();
  /// A = {a0 ring, a1 center}, B = {a2 ring, a3 center}.
  static SymmetryPattern obstacle();
  /// Corner/edge/center symmetric A and B (6 parameters).
  static SymmetryPattern isotropic();
  /// Every one of the 18 cells is its own parameter.
  static SymmetryPattern full();
  /// Looks up one of the named patterns above.
  static SymmetryPattern named(const std::string& name);

  friend bool operator==(const SymmetryPattern&, const SymmetryPattern&) = default;
};

/// Feedback template A, feedforward template B, bias I and Euler step dt.
struct TemplateSet {
  Kernel3 a{};
  Kernel3 b{};
  double bias = 0.0;
  double dt = 1.0;
  std::optional<SymmetryPattern> pattern;

  /// dt > 0 and finite coefficients; with `hardware_bound`, dt must be 2^s
  /// for -7 <= s <= 0. When a pattern is attached, coupled cells must agree.
  void validate(bool hardware_bound = false) const;

  /// Free parameters read back through the attached pattern.
  std::vector<double> free_params() const;

  friend bool operator==(const TemplateSet&, const TemplateSet&) = default;
};

/// Fills each layout cell with params[index]. Bias is 0 and dt is 1.
TemplateSet expand_pattern(const SymmetryPattern& pattern, std::span<const double> params);

/// Inverse of expand_pattern. Throws if coupled cells hold different values.
std::vector<double> extract_params(const SymmetryPattern& pattern, const Kernel3& a,
                                   const Kernel3& b);

/// True when dt == 2^s exactly for some integer s in [-7, 0].
bool is_hardware_step(double dt);

}  // namespace cennq
