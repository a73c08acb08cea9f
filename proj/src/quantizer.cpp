#include "nvq/quantizer.hpp"

#include <stdexcept>

namespace nvq {

using kernels::PreparedQuantizer;

int quantize(float x, const Params& params, const Interval& iv, int beta) {
    PreparedQuantizer prep = kernels::prepare(params, iv, beta);
    std::uint8_t code = 0;
    kernels::kernel_ops(prep).quantize(prep, &x, 1, &code);
    return code;
}

float dequantize(int code, const Params& params, const Interval& iv, int beta) {
    if (beta != 4 && beta != 8) throw ConfigError("beta must be 4 or 8");
    if (code < 0 || code > (1 << beta) - 1) {
        throw std::domain_error("dequantize: code out of range for beta");
    }
    PreparedQuantizer prep = kernels::prepare(params, iv, beta);
    std::uint8_t c = static_cast<std::uint8_t>(code);
    float out = 0.0f;
    kernels::kernel_ops(prep).dequantize(prep, &c, 1, &out);
    return out;
}

double recon_loss(const PreparedQuantizer& prep, std::span<const float> v) {
    thread_local std::vector<std::uint8_t> codes;
    thread_local std::vector<float> recon;
    codes.resize(v.size());
    recon.resize(v.size());
    const kernels::KernelOps& ops = kernels::kernel_ops(prep);
    ops.quantize(prep, v.data(), v.size(), codes.data());
    ops.dequantize(prep, codes.data(), v.size(), recon.data());
    double loss = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double e = static_cast<double>(v[i]) - static_cast<double>(recon[i]);
        loss += e * e;
    }
    return loss;
}

double uniform_loss(std::span<const float> v, const Interval& iv, int beta) {
    if (v.empty()) throw std::invalid_argument("uniform_loss: empty vector");
    if (iv.degenerate()) return 0.0;
    PreparedQuantizer prep = kernels::prepare({Family::uniform, 0, 0}, iv, beta);
    return recon_loss(prep, v);
}

double nvq_loss(std::span<const float> v, const Params& params,
                const Interval& iv, int beta) {
    if (v.empty()) throw std::invalid_argument("nvq_loss: empty vector");
    if (iv.degenerate()) return 0.0;
    PreparedQuantizer prep = kernels::prepare(params, iv, beta);
    return recon_loss(prep, v);
}

RatioResult objective_ratio(std::span<const float> v, const Params& params,
                            const Interval& iv, int beta) {
    double unif = uniform_loss(v, iv, beta);
    if (unif == 0.0) {
        return {1.0, true};
    }
    return {unif / nvq_loss(v, params, iv, beta), false};
}

CodeBlock pack_codes(std::span<const std::uint8_t> codes, int beta) {
    if (beta != 4 && beta != 8) throw ConfigError("beta must be 4 or 8");
    const int max_code = (1 << beta) - 1;
    for (std::uint8_t c : codes) {
        if (c > max_code) {
            throw std::invalid_argument("pack_codes: code exceeds beta-bit range");
        }
    }
    CodeBlock block;
    block.beta = static_cast<std::uint8_t>(beta);
    block.count = static_cast<std::uint32_t>(codes.size());
    block.bytes.resize(packed_size(codes.size(), beta));
    if (beta == 8) {
        std::copy(codes.begin(), codes.end(), block.bytes.begin());
    } else {
        for (std::size_t i = 0; i < codes.size(); ++i) {
            if ((i & 1) == 0) {
                block.bytes[i / 2] = codes[i];  // low nibble first
            } else {
                block.bytes[i / 2] |= static_cast<std::uint8_t>(codes[i] << 4);
            }
        }
    }
    return block;
}

std::vector<std::uint8_t> unpack_codes(const CodeBlock& block) {
    std::vector<std::uint8_t> codes(block.count);
    if (block.beta == 8) {
        std::copy_n(block.bytes.begin(), block.count, codes.begin());
    } else {
        for (std::size_t i = 0; i < codes.size(); ++i) {
            std::uint8_t byte = block.bytes[i / 2];
            codes[i] = (i & 1) ? (byte >> 4) : (byte & 0x0f);
        }
    }
    return codes;
}

}  // namespace nvq
