#include "cennq/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cennq {

namespace {

void check_frac_bits(int frac_bits) {
  if (frac_bits < 0 || frac_bits > kWordBits - 2)
    throw std::invalid_argument("frac_bits must lie in [0, " + std::to_string(kWordBits - 2) + "]");
}

FixedResult saturate(std::int64_t v, int frac_bits) {
  if (v > kRawMax) return {{kRawMax, frac_bits}, true};
  if (v < kRawMin) return {{kRawMin, frac_bits}, true};
  return {{static_cast<std::int32_t>(v), frac_bits}, false};
}

}  // namespace

double FixedWord::value() const { return from_fixed(*this); }

FixedResult to_fixed(double v, int frac_bits) {
  check_frac_bits(frac_bits);
  if (std::isnan(v)) throw std::invalid_argument("to_fixed: NaN input");
  const double scaled = std::nearbyint(std::ldexp(v, frac_bits));  // ties to even
  if (scaled > static_cast<double>(kRawMax)) return {{kRawMax, frac_bits}, true};
  if (scaled < static_cast<double>(kRawMin)) return {{kRawMin, frac_bits}, true};
  return {{static_cast<std::int32_t>(scaled), frac_bits}, false};
}

double from_fixed(FixedWord w) { return std::ldexp(static_cast<double>(w.raw), -w.frac_bits); }

ShiftCoeff ShiftCoeff::pow2(int sign, int exponent) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("shift coefficient sign must be +-1");
  return {sign, exponent};
}

ShiftCoeff ShiftCoeff::from_value(double v) {
  if (v == 0.0) return zero();
  int e = 0;
  if (!std::isfinite(v) || std::abs(std::frexp(v, &e)) != 0.5)
    throw std::invalid_argument("coefficient " + std::to_string(v) + " is not zero or +-2^p");
  return {v < 0 ? -1 : 1, e - 1};
}

double ShiftCoeff::value() const { return sign == 0 ? 0.0 : sign * std::ldexp(1.0, exponent); }

std::string ShiftCoeff::to_string() const {
  if (sign == 0) return "0";
  return std::string(sign > 0 ? "+" : "-") + "2^" + std::to_string(exponent);
}

FixedResult shift_mul(FixedWord x, ShiftCoeff c) {
  check_frac_bits(x.frac_bits);
  if (c.is_zero() || x.raw == 0) return {{0, x.frac_bits}, false};
  std::int64_t v = x.raw;
  if (c.exponent >= 0) {
    if (c.exponent > 40) {
      const bool positive = (c.sign > 0) == (v > 0);
      return {{positive ? kRawMax : kRawMin, x.frac_bits}, true};
    }
    v *= std::int64_t{1} << c.exponent;
  } else {
    v >>= std::min(-c.exponent, 62);  // arithmetic: rounds toward -inf
  }
  return saturate(c.sign * v, x.frac_bits);
}

std::int64_t shift_to_accumulator(std::int64_t raw, ShiftCoeff c) {
  if (c.is_zero()) return 0;
  const int shift = kGuardBits + c.exponent;
  if (shift < 0 || shift > 40)
    throw std::invalid_argument("shift exponent " + std::to_string(c.exponent) +
                                " outside the accumulator's exact range");
  return c.sign * raw * (std::int64_t{1} << shift);
}

}  // namespace cennq
