#pragma once

#include <cstdint>
#include <random>

namespace rbflow {

/// All randomness in the library flows through one seeded generator type so
/// that a fixed seed reproduces a run exactly.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace rbflow
