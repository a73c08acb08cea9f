#include "nvq/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvq/fastmath.hpp"

namespace nvq {

namespace {

constexpr double kParamFloor = 1e-6;

void require_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in [0, 1]");
    }
}

void require_positive_shape(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("Kumaraswamy shape parameters must be positive");
    }
}

double require_width(const Interval& iv) {
    if (iv.degenerate()) {
        throw DegenerateIntervalError("interval is degenerate (x_min >= x_max)");
    }
    return static_cast<double>(iv.x_max) - static_cast<double>(iv.x_min);
}

double std_logistic(double t, double alpha, double x0) {
    return 1.0 / (1.0 + std::exp(-alpha * (t - x0)));
}

double pwl_logistic(double t, double alpha, double x0) {
    double z = fastmath::nqt_exp2(alpha * (t - x0));
    return z / (z + 1.0);
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::uniform: return "uniform";
        case Family::kumaraswamy: return "kumaraswamy";
        case Family::loglog: return "loglog";
        case Family::nqt: return "nqt";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "uniform") return Family::uniform;
    if (name == "kumaraswamy") return Family::kumaraswamy;
    if (name == "loglog") return Family::loglog;
    if (name == "nqt") return Family::nqt;
    throw ConfigError("unknown nonlinearity family: " + name);
}

double kumaraswamy_cdf(double t, double a, double b) {
    require_unit(t, "kumaraswamy_cdf argument");
    require_positive_shape(a, b);
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - std::pow(t, a), b);
}

double kumaraswamy_icdf(double u, double a, double b) {
    require_unit(u, "kumaraswamy_icdf argument");
    require_positive_shape(a, b);
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return std::pow(1.0 - std::pow(1.0 - u, 1.0 / b), 1.0 / a);
}

double logistic_scaled(double x, const Params& params, const Interval& iv) {
    double w = require_width(iv);
    if (x == iv.x_min) return 0.0;
    if (x == iv.x_max) return 1.0;
    double alpha = params.p1, x0 = params.p2;
    double l0 = std_logistic(iv.x_min / w, alpha, x0);
    double l1 = std_logistic(iv.x_max / w, alpha, x0);
    double u = (std_logistic(x / w, alpha, x0) - l0) / (l1 - l0);
    return std::clamp(u, 0.0, 1.0);
}

double logit_scaled(double u, const Params& params, const Interval& iv) {
    double w = require_width(iv);
    require_unit(u, "logit_scaled argument");
    // Endpoints are substituted directly so the unbounded logit never sees
    // its singular arguments.
    if (u == 0.0) return iv.x_min;
    if (u == 1.0) return iv.x_max;
    double alpha = params.p1, x0 = params.p2;
    double l0 = std_logistic(iv.x_min / w, alpha, x0);
    double l1 = std_logistic(iv.x_max / w, alpha, x0);
    double v = u * (l1 - l0) + l0;
    v = std::clamp(v, DBL_MIN, 1.0 - 1e-17);
    double x = w * (std::log(v / (1.0 - v)) / alpha + x0);
    return std::clamp(x, static_cast<double>(iv.x_min), static_cast<double>(iv.x_max));
}

double nqt_logit(double u, double alpha, double x0) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("nqt_logit argument must lie in (0, 1)");
    }
    return fastmath::nqt_log2(u / (1.0 - u)) / alpha + x0;
}

double nqt_logistic(double x, double alpha, double x0) {
    double z = fastmath::nqt_exp2(alpha * (x - x0));
    return z / (z + 1.0);
}

double nqt_logistic_scaled(double x, const Params& params, const Interval& iv) {
    double w = require_width(iv);
    if (x == iv.x_min) return 0.0;
    if (x == iv.x_max) return 1.0;
    double alpha = params.p1, x0 = params.p2;
    double l0 = pwl_logistic(iv.x_min / w, alpha, x0);
    double l1 = pwl_logistic(iv.x_max / w, alpha, x0);
    double u = (pwl_logistic(x / w, alpha, x0) - l0) / (l1 - l0);
    return std::clamp(u, 0.0, 1.0);
}

double nqt_logit_scaled(double u, const Params& params, const Interval& iv) {
    double w = require_width(iv);
    require_unit(u, "nqt_logit_scaled argument");
    if (u == 0.0) return iv.x_min;
    if (u == 1.0) return iv.x_max;
    double alpha = params.p1, x0 = params.p2;
    double l0 = pwl_logistic(iv.x_min / w, alpha, x0);
    double l1 = pwl_logistic(iv.x_max / w, alpha, x0);
    double v = u * (l1 - l0) + l0;
    v = std::clamp(v, DBL_MIN, 1.0 - 1e-17);
    double x = w * (fastmath::nqt_log2(v / (1.0 - v)) / alpha + x0);
    return std::clamp(x, static_cast<double>(iv.x_min), static_cast<double>(iv.x_max));
}

double forward(const Params& params, const Interval& iv, double x) {
    if (!params_feasible(params, iv)) {
        throw std::domain_error("forward: infeasible nonlinearity parameters");
    }
    switch (params.family) {
        case Family::uniform: {
            double w = require_width(iv);
            if (x == iv.x_max) return 1.0;
            return std::clamp((x - iv.x_min) / w, 0.0, 1.0);
        }
        case Family::kumaraswamy: {
            double w = require_width(iv);
            double t = std::clamp((x - iv.x_min) / w, 0.0, 1.0);
            return kumaraswamy_cdf(t, params.p1, params.p2);
        }
        case Family::loglog:
            return logistic_scaled(x, params, iv);
        case Family::nqt:
            return nqt_logistic_scaled(x, params, iv);
    }
    throw std::logic_error("forward: bad family tag");
}

double inverse(const Params& params, const Interval& iv, double u) {
    if (!params_feasible(params, iv)) {
        throw std::domain_error("inverse: infeasible nonlinearity parameters");
    }
    require_unit(u, "inverse argument");
    switch (params.family) {
        case Family::uniform: {
            double w = require_width(iv);
            if (u == 0.0) return iv.x_min;
            if (u == 1.0) return iv.x_max;
            return std::clamp(iv.x_min + u * w,
                              static_cast<double>(iv.x_min),
                              static_cast<double>(iv.x_max));
        }
        case Family::kumaraswamy: {
            double w = require_width(iv);
            if (u == 0.0) return iv.x_min;
            if (u == 1.0) return iv.x_max;
            double t = kumaraswamy_icdf(u, params.p1, params.p2);
            return std::clamp(iv.x_min + t * w,
                              static_cast<double>(iv.x_min),
                              static_cast<double>(iv.x_max));
        }
        case Family::loglog:
            return logit_scaled(u, params, iv);
        case Family::nqt:
            return nqt_logit_scaled(u, params, iv);
    }
    throw std::logic_error("inverse: bad family tag");
}

Params project_params(Params params, const Interval& iv) {
    switch (params.family) {
        case Family::uniform:
            break;
        case Family::kumaraswamy:
            params.p1 = std::max(params.p1, static_cast<float>(kParamFloor));
            params.p2 = std::max(params.p2, static_cast<float>(kParamFloor));
            break;
        case Family::loglog:
        case Family::nqt: {
            double w = require_width(iv);
            float s_lo = static_cast<float>(iv.x_min / w);
            float s_hi = static_cast<float>(iv.x_max / w);
            params.p1 = std::max(params.p1, static_cast<float>(kParamFloor));
            params.p2 = std::clamp(params.p2, s_lo, s_hi);
            break;
        }
    }
    return params;
}

bool params_feasible(const Params& params, const Interval& iv) {
    switch (params.family) {
        case Family::uniform:
            return true;
        case Family::kumaraswamy:
            return params.p1 > 0.0f && params.p2 > 0.0f;
        case Family::loglog:
        case Family::nqt: {
            if (!(params.p1 > 0.0f)) return false;
            if (iv.degenerate()) return true;  // never evaluated; x0 box is empty
            double w = static_cast<double>(iv.x_max) - static_cast<double>(iv.x_min);
            double s_lo = iv.x_min / w, s_hi = iv.x_max / w;
            return params.p2 >= static_cast<float>(s_lo) - 1e-6f &&
                   params.p2 <= static_cast<float>(s_hi) + 1e-6f;
        }
    }
    return false;
}

SnesInit initial_snes_state(Family family) {
    switch (family) {
        case Family::kumaraswamy:
            return {{1.0, 1.0}, {1.0, 1.0}};
        case Family::loglog:
        case Family::nqt:
            return {{10.0, 0.0}, {2.0, 0.5}};
        case Family::uniform:
            break;
    }
    throw std::invalid_argument("initial_snes_state: uniform quantization has no parameters to fit");
}

}  // namespace nvq
