// AVX2 + FMA variants of the fast-lane kernels. Each kernel follows the
// scalar reference in kernels_scalar.cpp operation for operation (same
// constants, same evaluation order, fused fmaf <-> vfmadd, IEEE division,
// identical bit manipulation), so codes and values are bit-identical; the
// equivalence tests assert that. Tails shorter than one vector fall back
// to the scalar reference.

#include <immintrin.h>

#include <cfloat>

#include "kernels_internal.hpp"
#include "nvq/fastmath.hpp"

namespace nvq::kernels {

namespace {

namespace fm = nvq::fastmath;

constexpr float kOneMinus = 0x1.fffffep-1f;

inline __m256 clamp01(__m256 u) {
    return _mm256_min_ps(_mm256_max_ps(u, _mm256_setzero_ps()),
                         _mm256_set1_ps(1.0f));
}

inline __m256 v_neg(__m256 x) {
    return _mm256_xor_ps(x, _mm256_set1_ps(-0.0f));
}

inline __m256 v_exp(__m256 x) {
    __m256 t = _mm256_mul_ps(x, _mm256_set1_ps(fm::kLog2E));
    t = _mm256_min_ps(_mm256_max_ps(t, _mm256_set1_ps(-125.0f)),
                      _mm256_set1_ps(125.0f));
    const __m256 cvt = _mm256_set1_ps(fm::kRoundMagic);
    __m256 r = _mm256_sub_ps(_mm256_add_ps(t, cvt), cvt);
    __m256 f = _mm256_sub_ps(t, r);
    __m256i i = _mm256_cvttps_epi32(r);
    __m256 p = _mm256_fmadd_ps(f, _mm256_set1_ps(fm::kExpC5),
                               _mm256_set1_ps(fm::kExpC4));
    p = _mm256_fmadd_ps(p, f, _mm256_set1_ps(fm::kExpC3));
    p = _mm256_fmadd_ps(p, f, _mm256_set1_ps(fm::kExpC2));
    p = _mm256_fmadd_ps(p, f, _mm256_set1_ps(fm::kExpC1));
    p = _mm256_fmadd_ps(p, f, _mm256_set1_ps(fm::kExpC0));
    __m256i bits = _mm256_add_epi32(_mm256_castps_si256(p),
                                    _mm256_slli_epi32(i, 23));
    return _mm256_castsi256_ps(bits);
}

inline __m256 v_log(__m256 x) {
    __m256i bits = _mm256_castps_si256(x);
    __m256i e = _mm256_and_si256(
        _mm256_sub_epi32(bits, _mm256_set1_epi32(fm::kLogBreak)),
        _mm256_set1_epi32(0xff800000));
    __m256 m = _mm256_castsi256_ps(_mm256_sub_epi32(bits, e));
    __m256 i = _mm256_mul_ps(_mm256_cvtepi32_ps(e),
                             _mm256_set1_ps(fm::kExpFieldScale));
    __m256 f = _mm256_sub_ps(m, _mm256_set1_ps(1.0f));
    __m256 s = _mm256_mul_ps(f, f);
    __m256 q = _mm256_fmadd_ps(_mm256_set1_ps(fm::kLogC3), f,
                               _mm256_set1_ps(fm::kLogC2));
    __m256 r = _mm256_fmadd_ps(_mm256_set1_ps(fm::kLogC5), f,
                               _mm256_set1_ps(fm::kLogC4));
    __m256 u = _mm256_fmadd_ps(_mm256_set1_ps(fm::kLogC6), s, r);
    u = _mm256_fmadd_ps(u, s, q);
    u = _mm256_fmadd_ps(u, s, f);
    return _mm256_fmadd_ps(i, _mm256_set1_ps(fm::kLn2), u);
}

inline __m256 load8_codes(const std::uint8_t* src) {
    __m128i b = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src));
    return _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(b));
}

inline __m256i load8_codes_epi32(const std::uint8_t* src) {
    __m128i b = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src));
    return _mm256_cvtepu8_epi32(b);
}

inline void store8_codes(__m256i v, std::uint8_t* dst) {
    __m128i lo = _mm256_castsi256_si128(v);
    __m128i hi = _mm256_extracti128_si256(v, 1);
    __m128i p16 = _mm_packus_epi32(lo, hi);
    __m128i p8 = _mm_packus_epi16(p16, p16);
    _mm_storel_epi64(reinterpret_cast<__m128i*>(dst), p8);
}

inline __m256i round_code(const PreparedQuantizer& p, __m256 u) {
    __m256 c = _mm256_floor_ps(
        _mm256_fmadd_ps(u, _mm256_set1_ps(p.levels_f), _mm256_set1_ps(0.5f)));
    return _mm256_cvttps_epi32(c);
}

// Selects lo where code == 0 and hi where code == levels, like the scalar
// dequantizers' endpoint substitution.
inline __m256 endpoint_blend(const PreparedQuantizer& p, __m256i codes,
                             __m256 v) {
    __m256 m0 = _mm256_castsi256_ps(
        _mm256_cmpeq_epi32(codes, _mm256_setzero_si256()));
    __m256 mL = _mm256_castsi256_ps(
        _mm256_cmpeq_epi32(codes, _mm256_set1_epi32(p.levels)));
    v = _mm256_blendv_ps(v, _mm256_set1_ps(p.hi), mL);
    return _mm256_blendv_ps(v, _mm256_set1_ps(p.lo), m0);
}

inline __m256 clamp_range(const PreparedQuantizer& p, __m256 v) {
    return _mm256_min_ps(_mm256_max_ps(v, _mm256_set1_ps(p.lo)),
                         _mm256_set1_ps(p.hi));
}

inline __m256 logistic_fast(__m256 s, const PreparedQuantizer& p) {
    __m256 t = _mm256_fmadd_ps(s, _mm256_set1_ps(p.alpha),
                               _mm256_set1_ps(p.neg_alpha_x0));
    __m256 e = v_exp(v_neg(t));
    return _mm256_div_ps(_mm256_set1_ps(1.0f),
                         _mm256_add_ps(_mm256_set1_ps(1.0f), e));
}

inline __m256 logistic_pwl(__m256 s, const PreparedQuantizer& p) {
    __m256 t = _mm256_fmadd_ps(s, _mm256_set1_ps(p.alpha),
                               _mm256_set1_ps(p.neg_alpha_x0));
    t = _mm256_min_ps(_mm256_max_ps(t, _mm256_set1_ps(-126.0f)),
                      _mm256_set1_ps(126.0f));
    __m256 pf = _mm256_add_ps(_mm256_floor_ps(t), _mm256_set1_ps(1.0f));
    __m256 mf = _mm256_fmadd_ps(_mm256_sub_ps(t, pf), _mm256_set1_ps(0.5f),
                                _mm256_set1_ps(1.0f));
    __m256i zbits = _mm256_add_epi32(
        _mm256_castps_si256(mf),
        _mm256_slli_epi32(_mm256_cvttps_epi32(pf), 23));
    __m256 z = _mm256_castsi256_ps(zbits);
    return _mm256_div_ps(z, _mm256_add_ps(z, _mm256_set1_ps(1.0f)));
}

// --- uniform ---

void q_uniform(const PreparedQuantizer& p, const float* x, std::size_t n,
               std::uint8_t* codes) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vx = _mm256_loadu_ps(x + i);
        __m256 u = clamp01(_mm256_div_ps(
            _mm256_sub_ps(vx, _mm256_set1_ps(p.lo)), _mm256_set1_ps(p.width)));
        store8_codes(round_code(p, u), codes + i);
    }
    if (i < n) scalar_fast_ops(p.family).quantize(p, x + i, n - i, codes + i);
}

void d_uniform(const PreparedQuantizer& p, const std::uint8_t* codes,
               std::size_t n, float* out) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i ci = load8_codes_epi32(codes + i);
        __m256 u = _mm256_div_ps(_mm256_cvtepi32_ps(ci),
                                 _mm256_set1_ps(p.levels_f));
        __m256 v = _mm256_fmadd_ps(u, _mm256_set1_ps(p.width),
                                   _mm256_set1_ps(p.lo));
        v = clamp_range(p, v);
        _mm256_storeu_ps(out + i, endpoint_blend(p, ci, v));
    }
    if (i < n) scalar_fast_ops(p.family).dequantize(p, codes + i, n - i, out + i);
}

// --- kumaraswamy ---

void q_kumaraswamy(const PreparedQuantizer& p, const float* x, std::size_t n,
                   std::uint8_t* codes) {
    const __m256 flt_min = _mm256_set1_ps(FLT_MIN);
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vx = _mm256_loadu_ps(x + i);
        __m256 t = clamp01(_mm256_div_ps(
            _mm256_sub_ps(vx, _mm256_set1_ps(p.lo)), _mm256_set1_ps(p.width)));
        __m256 tt = _mm256_max_ps(t, flt_min);
        __m256 ta = v_exp(_mm256_mul_ps(_mm256_set1_ps(p.a), v_log(tt)));
        __m256 g = _mm256_max_ps(_mm256_sub_ps(one, ta), flt_min);
        __m256 h = _mm256_sub_ps(one, v_exp(_mm256_mul_ps(_mm256_set1_ps(p.b),
                                                          v_log(g))));
        __m256 u = clamp01(h);
        __m256 mhi = _mm256_cmp_ps(t, one, _CMP_GE_OQ);
        __m256 mlo = _mm256_cmp_ps(t, _mm256_setzero_ps(), _CMP_LE_OQ);
        u = _mm256_blendv_ps(u, one, mhi);
        u = _mm256_blendv_ps(u, _mm256_setzero_ps(), mlo);
        store8_codes(round_code(p, u), codes + i);
    }
    if (i < n) scalar_fast_ops(p.family).quantize(p, x + i, n - i, codes + i);
}

void d_kumaraswamy(const PreparedQuantizer& p, const std::uint8_t* codes,
                   std::size_t n, float* out) {
    const __m256 flt_min = _mm256_set1_ps(FLT_MIN);
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i ci = load8_codes_epi32(codes + i);
        __m256 u = _mm256_div_ps(_mm256_cvtepi32_ps(ci),
                                 _mm256_set1_ps(p.levels_f));
        __m256 g = _mm256_max_ps(_mm256_sub_ps(one, u), flt_min);
        __m256 gb = v_exp(_mm256_mul_ps(_mm256_set1_ps(p.inv_b), v_log(g)));
        __m256 r = _mm256_max_ps(_mm256_sub_ps(one, gb), flt_min);
        __m256 t = v_exp(_mm256_mul_ps(_mm256_set1_ps(p.inv_a), v_log(r)));
        __m256 v = _mm256_fmadd_ps(t, _mm256_set1_ps(p.width),
                                   _mm256_set1_ps(p.lo));
        v = clamp_range(p, v);
        _mm256_storeu_ps(out + i, endpoint_blend(p, ci, v));
    }
    if (i < n) scalar_fast_ops(p.family).dequantize(p, codes + i, n - i, out + i);
}

// --- loglog ---

void q_loglog(const PreparedQuantizer& p, const float* x, std::size_t n,
              std::uint8_t* codes) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 s = _mm256_div_ps(_mm256_loadu_ps(x + i),
                                 _mm256_set1_ps(p.width));
        __m256 L = logistic_fast(s, p);
        __m256 u = clamp01(_mm256_mul_ps(
            _mm256_sub_ps(L, _mm256_set1_ps(p.l0)),
            _mm256_set1_ps(p.inv_delta)));
        store8_codes(round_code(p, u), codes + i);
    }
    if (i < n) scalar_fast_ops(p.family).quantize(p, x + i, n - i, codes + i);
}

void d_loglog(const PreparedQuantizer& p, const std::uint8_t* codes,
              std::size_t n, float* out) {
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i ci = load8_codes_epi32(codes + i);
        __m256 u = _mm256_div_ps(_mm256_cvtepi32_ps(ci),
                                 _mm256_set1_ps(p.levels_f));
        __m256 v = _mm256_fmadd_ps(u, _mm256_set1_ps(p.delta),
                                   _mm256_set1_ps(p.l0));
        v = _mm256_min_ps(_mm256_max_ps(v, _mm256_set1_ps(FLT_MIN)),
                          _mm256_set1_ps(kOneMinus));
        __m256 z = _mm256_div_ps(v, _mm256_sub_ps(one, v));
        __m256 w = _mm256_mul_ps(
            _mm256_set1_ps(p.width),
            _mm256_fmadd_ps(_mm256_set1_ps(p.inv_alpha), v_log(z),
                            _mm256_set1_ps(p.x0)));
        w = clamp_range(p, w);
        _mm256_storeu_ps(out + i, endpoint_blend(p, ci, w));
    }
    if (i < n) scalar_fast_ops(p.family).dequantize(p, codes + i, n - i, out + i);
}

// --- nqt ---

void q_nqt(const PreparedQuantizer& p, const float* x, std::size_t n,
           std::uint8_t* codes) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 s = _mm256_div_ps(_mm256_loadu_ps(x + i),
                                 _mm256_set1_ps(p.width));
        __m256 L = logistic_pwl(s, p);
        __m256 u = clamp01(_mm256_mul_ps(
            _mm256_sub_ps(L, _mm256_set1_ps(p.l0)),
            _mm256_set1_ps(p.inv_delta)));
        store8_codes(round_code(p, u), codes + i);
    }
    if (i < n) scalar_fast_ops(p.family).quantize(p, x + i, n - i, codes + i);
}

void d_nqt(const PreparedQuantizer& p, const std::uint8_t* codes,
           std::size_t n, float* out) {
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i ci = load8_codes_epi32(codes + i);
        __m256 u = _mm256_div_ps(_mm256_cvtepi32_ps(ci),
                                 _mm256_set1_ps(p.levels_f));
        __m256 v = _mm256_fmadd_ps(u, _mm256_set1_ps(p.delta),
                                   _mm256_set1_ps(p.l0));
        v = _mm256_min_ps(_mm256_max_ps(v, _mm256_set1_ps(FLT_MIN)),
                          _mm256_set1_ps(kOneMinus));
        __m256 z = _mm256_div_ps(v, _mm256_sub_ps(one, v));
        __m256i bits = _mm256_castps_si256(z);
        __m256 pf = _mm256_cvtepi32_ps(_mm256_sub_epi32(
            _mm256_srli_epi32(bits, 23), _mm256_set1_epi32(128)));
        __m256 mf = _mm256_castsi256_ps(_mm256_or_si256(
            _mm256_and_si256(bits, _mm256_set1_epi32(0x007fffff)),
            _mm256_set1_epi32(0x3f800000)));
        __m256 w = _mm256_mul_ps(
            _mm256_set1_ps(p.width),
            _mm256_fmadd_ps(_mm256_set1_ps(p.inv_alpha),
                            _mm256_add_ps(mf, pf), _mm256_set1_ps(p.x0)));
        w = clamp_range(p, w);
        _mm256_storeu_ps(out + i, endpoint_blend(p, ci, w));
    }
    if (i < n) scalar_fast_ops(p.family).dequantize(p, codes + i, n - i, out + i);
}

}  // namespace

const KernelOps& avx2_fast_ops(Family family) {
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
    throw std::logic_error("avx2_fast_ops: bad family tag");
}

}  // namespace nvq::kernels
