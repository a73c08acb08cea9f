#pragma once

// Synthetic bell-shaped embedding stand-in: per-vector Gaussian entries with
// a randomly drawn scale, tail weight and slight skew, so value
// distributions are similar across vectors but not identical.

#include <cstdint>

#include "nvq/types.hpp"

namespace nvq {

FloatMatrix synth_dataset(std::size_t n, std::uint32_t d, std::uint64_t seed);

}  // namespace nvq
