#pragma once

// Block quantize/dequantize kernels: the throughput path of the library.
//
// Two math modes exist. `fast` is the default production lane: float32
// arithmetic with the minimax exp/log pair and the piecewise-linear base-2
// pair from fastmath.hpp. `exact` swaps in double-precision library
// transcendentals for accuracy testing; it is scalar only.
//
// For the fast lane there is a scalar reference kernel per family and an
// AVX2 variant selected at runtime. The AVX2 variants mirror the scalar
// instruction sequence operation for operation and produce bit-identical
// codes and values; the equivalence suite enforces this.

#include <cstddef>
#include <cstdint>

#include "nvq/types.hpp"

namespace nvq::kernels {

enum class MathMode : std::uint8_t { fast = 0, exact = 1 };
enum class Isa : std::uint8_t { scalar = 0, avx2 = 1 };

// Per-(sub)vector constants, derived once from (params, interval, beta).
// The sigmoid constants l0 / delta are computed with the same arithmetic
// the kernel body uses, so the interval endpoints land exactly on code 0
// and code `levels`.
struct PreparedQuantizer {
    Family family = Family::uniform;
    MathMode mode = MathMode::fast;
    int levels = 255;        // 2^beta - 1
    float levels_f = 255.0f;
    float lo = 0.0f, hi = 0.0f, width = 0.0f;
    // Kumaraswamy
    float a = 0.0f, b = 0.0f, inv_a = 0.0f, inv_b = 0.0f;
    // loglog / nqt (x0 in width-scaled units)
    float alpha = 0.0f, x0 = 0.0f, inv_alpha = 0.0f, neg_alpha_x0 = 0.0f;
    float s_lo = 0.0f, s_hi = 0.0f;
    float l0 = 0.0f, delta = 0.0f, inv_delta = 0.0f;
};

// Validates beta in {4, 8}, a non-degenerate interval and feasible params.
PreparedQuantizer prepare(const Params& params, const Interval& iv, int beta,
                          MathMode mode = MathMode::fast);

struct KernelOps {
    // One byte per code (packing to nibbles is a separate storage step).
    void (*quantize)(const PreparedQuantizer&, const float* x, std::size_t n,
                     std::uint8_t* codes);
    void (*dequantize)(const PreparedQuantizer&, const std::uint8_t* codes,
                       std::size_t n, float* out);
};

const KernelOps& kernel_ops(Family family, MathMode mode, Isa isa);
// Dispatch with the active ISA.
const KernelOps& kernel_ops(const PreparedQuantizer& prep);

bool isa_available(Isa isa);
// Startup default: best available ISA, overridable with NVQ_ISA=scalar|avx2.
Isa active_isa();
void set_isa(Isa isa);  // throws ConfigError if unavailable

}  // namespace nvq::kernels
