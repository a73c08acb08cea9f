// Scalar reference kernels, fast math lane. These define the semantics the
// AVX2 variants must reproduce bit for bit: every arithmetic step here has
// a direct vector counterpart (fmaf <-> vfmadd, floorf <-> vroundps, IEEE
// div <-> vdivps, bit twiddling <-> integer SIMD), evaluated in the same
// order with the same constants.

#include <cfloat>
#include <cmath>

#include "nvq/fastmath.hpp"
#include "nvq/kernels.hpp"
#include "nvq/nonlinearity.hpp"

namespace nvq::kernels {

namespace {

using fastmath::as_float;
using fastmath::as_int;

// Largest float below 1; clamping v here keeps v/(1-v) finite and normal.
constexpr float kOneMinus = 0x1.fffffep-1f;

inline float clamp01(float u) {
    return u < 0.0f ? 0.0f : (u > 1.0f ? 1.0f : u);
}

inline std::uint8_t round_code(const PreparedQuantizer& p, float u) {
    float c = std::floor(std::fmaf(u, p.levels_f, 0.5f));
    return static_cast<std::uint8_t>(static_cast<int>(c));
}

// Kernel inputs are floored to FLT_MIN before log_raw, so the unchecked
// variants apply.
using fastmath::detail::exp_raw;
using fastmath::detail::log_raw;

inline float logistic_fast(float s, const PreparedQuantizer& p) {
    float t = std::fmaf(s, p.alpha, p.neg_alpha_x0);
    return 1.0f / (1.0f + exp_raw(-t));
}

inline float logistic_pwl(float s, const PreparedQuantizer& p) {
    float t = std::fmaf(s, p.alpha, p.neg_alpha_x0);
    t = t < -126.0f ? -126.0f : (t > 126.0f ? 126.0f : t);
    float pf = std::floor(t) + 1.0f;
    float mf = std::fmaf(t - pf, 0.5f, 1.0f);
    float z = as_float(as_int(mf) + (static_cast<std::int32_t>(pf) << 23));
    return z / (z + 1.0f);
}

// --- uniform ---

void q_uniform(const PreparedQuantizer& p, const float* x, std::size_t n,
               std::uint8_t* codes) {
    for (std::size_t i = 0; i < n; ++i) {
        float u = clamp01((x[i] - p.lo) / p.width);
        codes[i] = round_code(p, u);
    }
}

void d_uniform(const PreparedQuantizer& p, const std::uint8_t* codes,
               std::size_t n, float* out) {
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        float u = static_cast<float>(c) / p.levels_f;
        float v = std::fmaf(u, p.width, p.lo);
        v = v < p.lo ? p.lo : (v > p.hi ? p.hi : v);
        out[i] = c == 0 ? p.lo : (c == p.levels ? p.hi : v);
    }
}

// --- kumaraswamy ---

void q_kumaraswamy(const PreparedQuantizer& p, const float* x, std::size_t n,
                   std::uint8_t* codes) {
    for (std::size_t i = 0; i < n; ++i) {
        float t = clamp01((x[i] - p.lo) / p.width);
        float tt = t < FLT_MIN ? FLT_MIN : t;
        float ta = exp_raw(p.a * log_raw(tt));       // t^a
        float g = 1.0f - ta;
        g = g < FLT_MIN ? FLT_MIN : g;
        float h = 1.0f - exp_raw(p.b * log_raw(g));  // 1 - (1 - t^a)^b
        float u = t <= 0.0f ? 0.0f : (t >= 1.0f ? 1.0f : clamp01(h));
        codes[i] = round_code(p, u);
    }
}

void d_kumaraswamy(const PreparedQuantizer& p, const std::uint8_t* codes,
                   std::size_t n, float* out) {
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        float u = static_cast<float>(c) / p.levels_f;
        float g = 1.0f - u;
        g = g < FLT_MIN ? FLT_MIN : g;
        float gb = exp_raw(p.inv_b * log_raw(g));    // (1-u)^(1/b)
        float r = 1.0f - gb;
        r = r < FLT_MIN ? FLT_MIN : r;
        float t = exp_raw(p.inv_a * log_raw(r));     // (1-(1-u)^(1/b))^(1/a)
        float v = std::fmaf(t, p.width, p.lo);
        v = v < p.lo ? p.lo : (v > p.hi ? p.hi : v);
        out[i] = c == 0 ? p.lo : (c == p.levels ? p.hi : v);
    }
}

// --- loglog ---

void q_loglog(const PreparedQuantizer& p, const float* x, std::size_t n,
              std::uint8_t* codes) {
    for (std::size_t i = 0; i < n; ++i) {
        float s = x[i] / p.width;
        float u = clamp01((logistic_fast(s, p) - p.l0) * p.inv_delta);
        codes[i] = round_code(p, u);
    }
}

void d_loglog(const PreparedQuantizer& p, const std::uint8_t* codes,
              std::size_t n, float* out) {
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        float u = static_cast<float>(c) / p.levels_f;
        float v = std::fmaf(u, p.delta, p.l0);
        v = v < FLT_MIN ? FLT_MIN : (v > kOneMinus ? kOneMinus : v);
        float z = v / (1.0f - v);
        float w = p.width * std::fmaf(p.inv_alpha, log_raw(z), p.x0);
        w = w < p.lo ? p.lo : (w > p.hi ? p.hi : w);
        out[i] = c == 0 ? p.lo : (c == p.levels ? p.hi : w);
    }
}

// --- nqt ---

void q_nqt(const PreparedQuantizer& p, const float* x, std::size_t n,
           std::uint8_t* codes) {
    for (std::size_t i = 0; i < n; ++i) {
        float s = x[i] / p.width;
        float u = clamp01((logistic_pwl(s, p) - p.l0) * p.inv_delta);
        codes[i] = round_code(p, u);
    }
}

void d_nqt(const PreparedQuantizer& p, const std::uint8_t* codes,
           std::size_t n, float* out) {
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        float u = static_cast<float>(c) / p.levels_f;
        float v = std::fmaf(u, p.delta, p.l0);
        v = v < FLT_MIN ? FLT_MIN : (v > kOneMinus ? kOneMinus : v);
        float z = v / (1.0f - v);
        std::int32_t bits = as_int(z);
        float pf = static_cast<float>((bits >> 23) - 128);
        float mf = as_float((bits & 0x007fffff) | 0x3f800000);
        float w = p.width * std::fmaf(p.inv_alpha, mf + pf, p.x0);
        w = w < p.lo ? p.lo : (w > p.hi ? p.hi : w);
        out[i] = c == 0 ? p.lo : (c == p.levels ? p.hi : w);
    }
}

}  // namespace

PreparedQuantizer prepare(const Params& params, const Interval& iv, int beta,
                          MathMode mode) {
    if (beta != 4 && beta != 8) {
        throw ConfigError("beta must be 4 or 8");
    }
    if (iv.degenerate()) {
        throw DegenerateIntervalError("prepare: interval is degenerate");
    }
    if (!params_feasible(params, iv)) {
        throw std::invalid_argument("prepare: infeasible nonlinearity parameters");
    }
    PreparedQuantizer p;
    p.family = params.family;
    p.mode = mode;
    p.levels = (1 << beta) - 1;
    p.levels_f = static_cast<float>(p.levels);
    p.lo = iv.x_min;
    p.hi = iv.x_max;
    p.width = iv.x_max - iv.x_min;
    switch (params.family) {
        case Family::uniform:
            break;
        case Family::kumaraswamy:
            p.a = params.p1;
            p.b = params.p2;
            p.inv_a = 1.0f / params.p1;
            p.inv_b = 1.0f / params.p2;
            break;
        case Family::loglog:
        case Family::nqt: {
            p.alpha = params.p1;
            p.x0 = params.p2;
            p.inv_alpha = 1.0f / params.p1;
            p.neg_alpha_x0 = -params.p1 * params.p2;
            p.s_lo = p.lo / p.width;
            p.s_hi = p.hi / p.width;
            float l1;
            if (params.family == Family::loglog) {
                p.l0 = logistic_fast(p.s_lo, p);
                l1 = logistic_fast(p.s_hi, p);
            } else {
                p.l0 = logistic_pwl(p.s_lo, p);
                l1 = logistic_pwl(p.s_hi, p);
            }
            p.delta = l1 - p.l0;
            p.inv_delta = 1.0f / p.delta;
            break;
        }
    }
    return p;
}

const KernelOps& scalar_fast_ops(Family family) {
    static const KernelOps uniform{q_uniform, d_uniform};
    static const KernelOps kuma{q_kumaraswamy, d_kumaraswamy};
    static const KernelOps loglog{q_loglog, d_loglog};
    static const KernelOps nqt{q_nqt, d_nqt};
    switch (family) {
        case Family::uniform: return uniform;
        case Family::kumaraswamy: return kuma;
        case Family::loglog: return loglog;
        case Family::nqt: return nqt;
    }
    throw std::logic_error("scalar_fast_ops: bad family tag");
}

}  // namespace nvq::kernels
