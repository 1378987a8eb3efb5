#pragma once

#include <cstdint>
#include <string>

namespace cennq {

inline constexpr int kWordBits = 18;
inline constexpr std::int32_t kRawMax = (1 << (kWordBits - 1)) - 1;  // 131071
inline constexpr std::int32_t kRawMin = -(1 << (kWordBits - 1));     // -131072
inline constexpr int kDefaultFracBits = 12;                          // Q5.12

/// Guard bits carried below the word's binary point by the 48-bit
/// accumulator, so right shifts by up to this many places stay exact.
inline constexpr int kGuardBits = 16;
inline constexpr int kAccumulatorBits = 48;

/// 18-bit two's-complement word with `frac_bits` fractional bits.
struct FixedWord {
  std::int32_t raw = 0;
  int frac_bits = kDefaultFracBits;

  double value() const;
  friend bool operator==(const FixedWord&, const FixedWord&) = default;
};

/// A conversion or product together with its saturation flag.
struct FixedResult {
  FixedWord word;
  bool saturated = false;
};

/// Round-to-nearest-even encode; out-of-range values clamp to the word
/// limits and set `saturated`. NaN throws std::invalid_argument.
FixedResult to_fixed(double v, int frac_bits = kDefaultFracBits);
double from_fixed(FixedWord w);

/// Zero or sign * 2^exponent. Coefficient of an S1/S2 shifter module.
struct ShiftCoeff {
  int sign = 0;  ///< 0 encodes the zero coefficient, otherwise +1 / -1
  int exponent = 0;

  static ShiftCoeff zero() { return {}; }
  static ShiftCoeff pow2(int sign, int exponent);
  /// Exact conversion; throws std::invalid_argument unless v is 0 or +-2^p.
  static ShiftCoeff from_value(double v);

  bool is_zero() const { return sign == 0; }
  double value() const;
  std::string to_string() const;

  friend bool operator==(const ShiftCoeff&, const ShiftCoeff&) = default;
  friend auto operator<=>(const ShiftCoeff&, const ShiftCoeff&) = default;
};

/// Arithmetic shift of raw by |p| (left with saturation for p > 0, right
/// rounding toward -inf for p < 0), then the sign is applied.
FixedResult shift_mul(FixedWord x, ShiftCoeff c);

/// x * c held in the accumulator format (frac_bits + kGuardBits fractional
/// bits). Exact for exponents >= -kGuardBits.
std::int64_t shift_to_accumulator(std::int64_t raw, ShiftCoeff c);

}  // namespace cennq
