#pragma once

// Single-precision transcendental replacements used by the throughput
// kernels: a minimax polynomial exp/log pair and the piecewise-linear
// base-2 log/exp built directly from the IEEE-754 bit layout.
//
// The polynomial coefficients are minimax (Remez) fits: degree 5 for 2^f on
// [-0.5, 0.5] (relative error 7.5e-8) and degree 6 with pinned linear term
// for ln(1+f) on [-1/3, 1/3] (absolute error 2.1e-6). The constants are
// shared with the AVX2 kernels, which evaluate the same sequence.

#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nvq::fastmath {

inline float as_float(std::int32_t b) { return std::bit_cast<float>(b); }
inline std::int32_t as_int(float x) { return std::bit_cast<std::int32_t>(x); }
inline double as_double(std::int64_t b) { return std::bit_cast<double>(b); }
inline std::int64_t as_int64(double x) { return std::bit_cast<std::int64_t>(x); }

inline constexpr float kLog2E = 1.442695041f;
inline constexpr float kRoundMagic = 12582912.0f;  // 1.5 * 2^23
inline constexpr float kExpC5 = 0.0013276472167819943f;
inline constexpr float kExpC4 = 0.0096755413310213911f;
inline constexpr float kExpC3 = 0.055507132728753912f;
inline constexpr float kExpC2 = 0.24022119723969178f;
inline constexpr float kExpC1 = 0.69314696706526493f;
inline constexpr float kExpC0 = 1.0000000716546416f;

inline constexpr std::int32_t kLogBreak = 0x3f2aaaab;  // splits m into [2/3, 4/3)
inline constexpr float kExpFieldScale = 1.19209290e-7f;  // 2^-23
inline constexpr float kLogC2 = -0.50004682285283196f;
inline constexpr float kLogC3 = 0.33228424612836542f;
inline constexpr float kLogC4 = -0.24761262918535054f;
inline constexpr float kLogC5 = 0.22631797521608315f;
inline constexpr float kLogC6 = -0.19961018300422524f;
inline constexpr float kLn2 = 0.693147182f;

namespace detail {

// e^x via range reduction to 2^i * 2^f, |f| <= 0.5, with a minimax
// polynomial for 2^f and the 2^i factor injected into the exponent field.
// The reduced argument is clamped so the exponent field never leaves the
// normal range: inputs beyond roughly +-86.6 saturate instead of wrapping.
inline float exp_raw(float x) {
    float t = x * kLog2E;
    t = t < -125.0f ? -125.0f : (t > 125.0f ? 125.0f : t);
    float r = (t + kRoundMagic) - kRoundMagic;  // round to nearest int
    float f = t - r;
    int i = static_cast<int>(r);
    float p = std::fmaf(f, kExpC5, kExpC4);
    p = std::fmaf(p, f, kExpC3);
    p = std::fmaf(p, f, kExpC2);
    p = std::fmaf(p, f, kExpC1);
    p = std::fmaf(p, f, kExpC0);
    return as_float(as_int(p) + (i << 23));
}

// ln(x) for positive normal x: split into m * 2^i with m in [2/3, 4/3),
// polynomial in m - 1, then add i * ln(2).
inline float log_raw(float x) {
    std::int32_t e = (as_int(x) - kLogBreak) & 0xff800000;
    float m = as_float(as_int(x) - e);
    float i = static_cast<float>(e) * kExpFieldScale;
    float f = m - 1.0f;
    float s = f * f;
    float q = std::fmaf(kLogC3, f, kLogC2);
    float r = std::fmaf(kLogC5, f, kLogC4);
    float u = std::fmaf(kLogC6, s, r);
    u = std::fmaf(u, s, q);
    u = std::fmaf(u, s, f);
    return std::fmaf(i, kLn2, u);
}

}  // namespace detail

inline float fast_exp(float x) { return detail::exp_raw(x); }

inline float fast_log(float x) {
    if (!(x >= FLT_MIN) || !std::isfinite(x)) {
        throw std::domain_error("fast_log: argument must be positive, finite and normal");
    }
    return detail::log_raw(x);
}

// x^c = exp(c * ln(x)); valid for positive normal x.
inline float fast_pow(float x, float c) { return fast_exp(c * fast_log(x)); }

// Piecewise-linear interpolation of log2: exact at powers of two, linear in
// the mantissa in between. Positive subnormals are flushed up to FLT_MIN.
inline float nqt_log2(float z) {
    if (!(z > 0.0f) || !std::isfinite(z)) {
        throw std::domain_error("nqt_log2: argument must be positive and finite");
    }
    if (z < FLT_MIN) z = FLT_MIN;
    std::int32_t bits = as_int(z);
    float p = static_cast<float>((bits >> 23) - 128);
    float m = as_float((bits & 0x007fffff) | 0x3f800000);  // mantissa in [1, 2)
    return m + p;
}

// Exact inverse of the piecewise-linear log2 on [-126, 126] (clamped).
inline float nqt_exp2(float t) {
    t = t < -126.0f ? -126.0f : (t > 126.0f ? 126.0f : t);
    float pf = std::floor(t) + 1.0f;
    float mf = std::fmaf(t - pf, 0.5f, 1.0f);  // in [0.5, 1)
    return as_float(as_int(mf) + (static_cast<std::int32_t>(pf) << 23));
}

// Double-precision twins of the piecewise-linear pair, used by the
// reference nonlinearity evaluations.
inline double nqt_log2(double z) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw std::domain_error("nqt_log2: argument must be positive and finite");
    }
    if (z < DBL_MIN) z = DBL_MIN;
    std::int64_t bits = as_int64(z);
    double p = static_cast<double>(((bits >> 52) & 0x7ff) - 1024);
    double m = as_double((bits & 0x000fffffffffffffLL) | 0x3ff0000000000000LL);
    return m + p;
}

inline double nqt_exp2(double t) {
    t = t < -1022.0 ? -1022.0 : (t > 1022.0 ? 1022.0 : t);
    double pf = std::floor(t) + 1.0;
    double mf = (t - pf) * 0.5 + 1.0;
    return as_double(as_int64(mf) + (static_cast<std::int64_t>(pf) << 52));
}

}  // namespace nvq::fastmath
