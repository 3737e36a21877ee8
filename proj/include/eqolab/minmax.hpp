#pragma once

#include <algorithm>

namespace eqolab {

// a ∨ b
inline double vee(double a, double b) { return std::max(a, b); }
// a ∧ b
inline double wedge(double a, double b) { return std::min(a, b); }
// (a)+
inline double positive_part(double a) { return a > 0.0 ? a : 0.0; }

}  // namespace eqolab
