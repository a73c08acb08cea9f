#pragma once

// Gradient-free per-(sub)vector fit of the nonlinearity parameters: a
// separable natural evolution strategy with a projection step, maximizing
// the improvement ratio over uniform quantization.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "nvq/kernels.hpp"
#include "nvq/types.hpp"

namespace nvq {

using Vec2 = std::array<double, 2>;

struct SnesHyperparams {
    int sample_count = 12;      // T
    double eta_mu = 1.0;
    double eta_sigma = 0.5223;
    double tol = 1e-4;          // stop when |mu(t) - mu(t-1)|_inf < tol
    int min_iters = 10;
    int max_iters = 100;
};

// T = 2(4 + floor(3 ln d)), eta_mu = 1, eta_sigma = (3 + ln d)/(5 sqrt d),
// tol = 1e-4, at least 10 and at most 100 iterations.
SnesHyperparams default_hyperparams(int param_dim);

// Rank-based utilities, best rank first: nonnegative log-shaped weights
// normalized to sum 1, shifted by -1/T so the total is zero.
std::vector<double> snes_utilities(int sample_count);

struct SnesState {
    Vec2 mu{};
    Vec2 sigma{};
    int iteration = 0;
};

// Deterministic normal sampler (Marsaglia polar on top of mt19937_64), so
// fits are bit-reproducible for a fixed seed independent of the platform's
// std::normal_distribution.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double operator()();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

struct StepOutcome {
    SnesState state;
    Vec2 best_sample{};     // best projected sample of this iteration
    double best_value = 0;  // objective at best_sample
};

using Objective = std::function<double(const Vec2&)>;
using Projection = std::function<Vec2(const Vec2&)>;

// One SNES iteration: T Gaussian samples, projection, rank utilities over
// the objective values, natural-gradient updates of mu (clamped at zero
// componentwise) and sigma (multiplicative, stays positive). Throws
// FitError if the objective returns NaN.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

StepOutcome snes_step(const SnesState& state, const Objective& objective,
                      const Projection& project, const SnesHyperparams& hp,
                      NormalSampler& rng);

struct FitResult {
    Params params;
    double objective = 1.0;  // best ratio seen; >= 1 after fallback
    int iterations = 0;
    bool converged = false;  // tolerance reached before the iteration cap
    bool fell_back_to_uniform = false;
};

// Fits `family` parameters to one (sub)vector by maximizing
// uniform_loss / nvq_loss. Tracks the best parameters over every evaluated
// candidate (all samples plus the projected means); if nothing beats
// parity, returns the uniform fallback with objective exactly 1.
// Constant vectors short-circuit to the fallback.
FitResult fit_subvector(std::span<const float> v, Family family, int beta,
                        const SnesHyperparams& hp, std::uint64_t seed,
                        kernels::MathMode mode = kernels::MathMode::fast);

// SplitMix64; used to derive independent per-vector / per-subvector seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace nvq
