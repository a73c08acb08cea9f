// Exact math lane: double precision, library transcendentals. Scalar only;
// used for accuracy testing against the fast kernels.

#include <cfloat>
#include <cmath>

#include "kernels_internal.hpp"
#include "nvq/fastmath.hpp"

namespace nvq::kernels {

namespace {

struct SigmoidConsts {
    double s_lo, s_hi, l0, delta;
};

double logistic_exact(double s, double alpha, double x0) {
    return 1.0 / (1.0 + std::exp(-alpha * (s - x0)));
}

double logistic_pwl(double s, double alpha, double x0) {
    double z = fastmath::nqt_exp2(alpha * (s - x0));
    return z / (z + 1.0);
}

template <double (*Logistic)(double, double, double)>
SigmoidConsts sigmoid_consts(const PreparedQuantizer& p) {
    SigmoidConsts c;
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    c.s_lo = p.lo / w;
    c.s_hi = p.hi / w;
    c.l0 = Logistic(c.s_lo, p.alpha, p.x0);
    c.delta = Logistic(c.s_hi, p.alpha, p.x0) - c.l0;
    return c;
}

std::uint8_t round_code(const PreparedQuantizer& p, double u) {
    double c = std::floor(u * p.levels + 0.5);
    if (c < 0.0) c = 0.0;
    if (c > p.levels) c = p.levels;
    return static_cast<std::uint8_t>(c);
}

float clamp_out(const PreparedQuantizer& p, double x) {
    if (x < p.lo) return p.lo;
    if (x > p.hi) return p.hi;
    return static_cast<float>(x);
}

void q_uniform(const PreparedQuantizer& p, const float* x, std::size_t n,
               std::uint8_t* codes) {
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        double u = (x[i] - p.lo) / w;
        u = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
        codes[i] = round_code(p, u);
    }
}

void d_uniform(const PreparedQuantizer& p, const std::uint8_t* codes,
               std::size_t n, float* out) {
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        if (c == 0) { out[i] = p.lo; continue; }
        if (c == p.levels) { out[i] = p.hi; continue; }
        out[i] = clamp_out(p, p.lo + w * (static_cast<double>(c) / p.levels));
    }
}

void q_kumaraswamy(const PreparedQuantizer& p, const float* x, std::size_t n,
                   std::uint8_t* codes) {
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        double t = (x[i] - p.lo) / w;
        t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
        double u = t <= 0.0 ? 0.0
                 : (t >= 1.0 ? 1.0 : 1.0 - std::pow(1.0 - std::pow(t, p.a), p.b));
        codes[i] = round_code(p, u);
    }
}

void d_kumaraswamy(const PreparedQuantizer& p, const std::uint8_t* codes,
                   std::size_t n, float* out) {
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        if (c == 0) { out[i] = p.lo; continue; }
        if (c == p.levels) { out[i] = p.hi; continue; }
        double u = static_cast<double>(c) / p.levels;
        double t = std::pow(1.0 - std::pow(1.0 - u, 1.0 / p.b), 1.0 / p.a);
        out[i] = clamp_out(p, p.lo + w * t);
    }
}

template <double (*Logistic)(double, double, double)>
void q_sigmoid(const PreparedQuantizer& p, const float* x, std::size_t n,
               std::uint8_t* codes) {
    SigmoidConsts sc = sigmoid_consts<Logistic>(p);
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i] / w;
        double u = (Logistic(s, p.alpha, p.x0) - sc.l0) / sc.delta;
        u = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
        codes[i] = round_code(p, u);
    }
}

void d_loglog(const PreparedQuantizer& p, const std::uint8_t* codes,
              std::size_t n, float* out) {
    SigmoidConsts sc = sigmoid_consts<logistic_exact>(p);
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        if (c == 0) { out[i] = p.lo; continue; }
        if (c == p.levels) { out[i] = p.hi; continue; }
        double v = (static_cast<double>(c) / p.levels) * sc.delta + sc.l0;
        v = v < DBL_MIN ? DBL_MIN : (v > 1.0 - 1e-17 ? 1.0 - 1e-17 : v);
        out[i] = clamp_out(p, w * (std::log(v / (1.0 - v)) / p.alpha + p.x0));
    }
}

void d_nqt(const PreparedQuantizer& p, const std::uint8_t* codes,
           std::size_t n, float* out) {
    SigmoidConsts sc = sigmoid_consts<logistic_pwl>(p);
    double w = static_cast<double>(p.hi) - static_cast<double>(p.lo);
    for (std::size_t i = 0; i < n; ++i) {
        int c = codes[i];
        if (c == 0) { out[i] = p.lo; continue; }
        if (c == p.levels) { out[i] = p.hi; continue; }
        double v = (static_cast<double>(c) / p.levels) * sc.delta + sc.l0;
        v = v < DBL_MIN ? DBL_MIN : (v > 1.0 - 1e-17 ? 1.0 - 1e-17 : v);
        out[i] = clamp_out(
            p, w * (fastmath::nqt_log2(v / (1.0 - v)) / p.alpha + p.x0));
    }
}

}  // namespace

const KernelOps& exact_ops(Family family) {
    static const KernelOps uniform{q_uniform, d_uniform};
    static const KernelOps kuma{q_kumaraswamy, d_kumaraswamy};
    static const KernelOps loglog{q_sigmoid<logistic_exact>, d_loglog};
    static const KernelOps nqt{q_sigmoid<logistic_pwl>, d_nqt};
    switch (family) {
        case Family::uniform: return uniform;
        case Family::kumaraswamy: return kuma;
        case Family::loglog: return loglog;
        case Family::nqt: return nqt;
    }
    throw std::logic_error("exact_ops: bad family tag");
}

}  // namespace nvq::kernels
