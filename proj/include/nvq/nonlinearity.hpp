#pragma once

// The invertible nonlinearities h / h^-1 that map a value interval onto
// [0, 1], plus their parameter projections and search initializations.
//
// These are the reference evaluations: double precision, exact library
// transcendentals. The throughput path lives in kernels.hpp and trades
// precision for speed; see kernels.hpp for how the two relate.

#include <array>

#include "nvq/types.hpp"

namespace nvq {

// Kumaraswamy CDF on [0, 1]: 1 - (1 - t^a)^b.
double kumaraswamy_cdf(double t, double a, double b);
// Kumaraswamy quantile: (1 - (1 - u)^(1/b))^(1/a).
double kumaraswamy_icdf(double u, double a, double b);

// Scaled sigmoid pair mapping [x_min, x_max] onto [0, 1]. The raw value is
// first divided by the interval width, so p2 (the midpoint x0) and p1 (the
// steepness alpha) are comparable across (sub)vectors. The normalizer
// Delta = L(x_max/w) - L(x_min/w) uses the same width-scaled arguments as
// the numerator so both endpoints map exactly.
double logistic_scaled(double x, const Params& params, const Interval& iv);
double logit_scaled(double u, const Params& params, const Interval& iv);

// Piecewise-linear (transcendental-free) logit/logistic pair. The logit is
// alpha^-1 * pwl_log2(u / (1 - u)) + x0; the logistic is its exact inverse.
double nqt_logit(double u, double alpha, double x0);
double nqt_logistic(double x, double alpha, double x0);

// Scaled versions of the piecewise-linear pair, same contract as
// logistic_scaled / logit_scaled.
double nqt_logistic_scaled(double x, const Params& params, const Interval& iv);
double nqt_logit_scaled(double u, const Params& params, const Interval& iv);

// Family dispatch: h and h^-1 of the quantizer. forward maps
// [x_min, x_max] -> [0, 1]; inverse is its right inverse on [0, 1].
double forward(const Params& params, const Interval& iv, double x);
double inverse(const Params& params, const Interval& iv, double u);

// Projects arbitrary real parameters onto the family's feasible set.
// Kumaraswamy floors a and b at 1e-6 (a = 0 would collapse the CDF);
// the sigmoid families floor alpha at 1e-6 and clamp x0 into the
// width-scaled interval. Idempotent.
Params project_params(Params params, const Interval& iv);

bool params_feasible(const Params& params, const Interval& iv);

// Published search-distribution initializations for the per-vector fit.
struct SnesInit {
    std::array<double, 2> mu;
    std::array<double, 2> sigma;
};
// Throws std::invalid_argument for uniform (nothing to fit).
SnesInit initial_snes_state(Family family);

}  // namespace nvq
