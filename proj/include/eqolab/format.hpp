#pragma once

#include <string>

namespace eqolab {

// Shortest decimal text that round-trips to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double x);

// 64-bit FNV-1a digest rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace eqolab
