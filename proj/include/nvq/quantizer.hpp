#pragma once

// The beta-bit quantize/dequantize pair, reconstruction losses, the ratio
// objective and packed code storage.

#include <cstdint>
#include <span>
#include <vector>

#include "nvq/kernels.hpp"
#include "nvq/types.hpp"

namespace nvq {

struct QuantizerConfig {
    int beta = 8;  // bits per code, 4 or 8
    Family family = Family::uniform;
};

// floor((2^beta - 1) * h(x) + 1/2), evaluated through the fast kernel lane
// (single value). Throws on infeasible params / degenerate interval.
int quantize(float x, const Params& params, const Interval& iv, int beta);
// h^-1(code / (2^beta - 1)); throws std::domain_error on out-of-range codes.
float dequantize(int code, const Params& params, const Interval& iv, int beta);

// Sum of squared reconstruction errors under the parameterless uniform
// quantizer; accumulated in double. A degenerate interval yields 0 (the
// constant vector is represented exactly by construction).
double uniform_loss(std::span<const float> v, const Interval& iv, int beta);
// Same under the family nonlinearity h with parameters `params`.
double nvq_loss(std::span<const float> v, const Params& params,
                const Interval& iv, int beta);

// Block versions against an already-prepared quantizer (the hot path).
double recon_loss(const kernels::PreparedQuantizer& prep,
                  std::span<const float> v);

struct RatioResult {
    double value = 1.0;
    // True when uniform_loss == 0: the vector is exactly representable and
    // the ratio is defined as parity.
    bool uniform_exact = false;
};
// uniform_loss / nvq_loss; the paper's per-vector improvement objective.
RatioResult objective_ratio(std::span<const float> v, const Params& params,
                            const Interval& iv, int beta);

// Packed beta-bit codes. For beta = 4 two codes share a byte, the earlier
// element in the low nibble; odd trailing nibbles are zero padded.
struct CodeBlock {
    std::uint8_t beta = 8;
    std::uint32_t count = 0;
    std::vector<std::uint8_t> bytes;  // ceil(count * beta / 8)
};

CodeBlock pack_codes(std::span<const std::uint8_t> codes, int beta);
std::vector<std::uint8_t> unpack_codes(const CodeBlock& block);

inline std::size_t packed_size(std::size_t count, int beta) {
    return (count * static_cast<std::size_t>(beta) + 7) / 8;
}

}  // namespace nvq
