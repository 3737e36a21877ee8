#pragma once

#include <cstdint>
#include <random>

namespace eqolab {

using Rng = std::mt19937_64;

// Deterministic 64-bit mix of a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace eqolab
