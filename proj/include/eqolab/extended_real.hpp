#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace eqolab {

// Nonnegative extended real: a finite value or +infinity.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : v_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }

  constexpr bool is_infinite() const { return v_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const { return !is_infinite(); }
  constexpr double value() const { return v_; }

  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend constexpr bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }

 private:
  double v_ = 0.0;
};

// Minimum where infinity always yields the other argument.
inline ExtReal ext_min(ExtReal a, ExtReal b) { return a.value() <= b.value() ? a : b; }

// Parses "inf"/"infinity" or a decimal number.
ExtReal parse_ext_real(const std::string& text);
std::string format_ext_real(ExtReal x);

}  // namespace eqolab
