#include "nvq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvq/nonlinearity.hpp"
#include "nvq/quantizer.hpp"

namespace nvq {

SnesHyperparams default_hyperparams(int param_dim) {
    if (param_dim < 1) {
        throw std::domain_error("default_hyperparams: param_dim must be >= 1");
    }
    double d = static_cast<double>(param_dim);
    SnesHyperparams hp;
    hp.sample_count = 2 * (4 + static_cast<int>(std::floor(3.0 * std::log(d))));
    hp.eta_mu = 1.0;
    hp.eta_sigma = (3.0 + std::log(d)) / (5.0 * std::sqrt(d));
    hp.tol = 1e-4;
    hp.min_iters = 10;
    hp.max_iters = 100;
    return hp;
}

std::vector<double> snes_utilities(int sample_count) {
    const int T = sample_count;
    std::vector<double> u(T);
    double denom = 0.0;
    for (int k = 1; k <= T; ++k) {
        double w = std::max(0.0, std::log(T / 2.0 + 1.0) - std::log(static_cast<double>(k)));
        u[k - 1] = w;
        denom += w;
    }
    for (int k = 0; k < T; ++k) {
        u[k] = u[k] / denom - 1.0 / T;
    }
    return u;
}

double NormalSampler::operator()() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Marsaglia polar method; uniforms from the 53-bit mantissa of the
    // engine output so the stream is platform independent.
    auto uniform = [this]() {
        return (engine_() >> 11) * 0x1.0p-53;
    };
    double a, b, s;
    do {
        a = 2.0 * uniform() - 1.0;
        b = 2.0 * uniform() - 1.0;
        s = a * a + b * b;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = b * f;
    has_cached_ = true;
    return a * f;
}

StepOutcome snes_step(const SnesState& state, const Objective& objective,
                      const Projection& project, const SnesHyperparams& hp,
                      NormalSampler& rng) {
    const int T = hp.sample_count;
    std::vector<Vec2> samples(T);   // raw N(0, I) draws
    std::vector<Vec2> projected(T);
    std::vector<double> value(T);
    for (int k = 0; k < T; ++k) {
        Vec2 s{rng(), rng()};
        samples[k] = s;
        Vec2 z{state.mu[0] + state.sigma[0] * s[0],
               state.mu[1] + state.sigma[1] * s[1]};
        projected[k] = project(z);
        value[k] = objective(projected[k]);
        if (std::isnan(value[k])) {
            throw FitError("snes_step: objective returned NaN");
        }
    }

    // Rank samples by objective, best first; ties keep sample order.
    std::vector<int> order(T);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int l, int r) { return value[l] > value[r]; });
    std::vector<double> utilities = snes_utilities(T);

    Vec2 grad_mu{0.0, 0.0};
    Vec2 grad_sigma{0.0, 0.0};
    for (int rank = 0; rank < T; ++rank) {
        const Vec2& s = samples[order[rank]];
        double u = utilities[rank];
        for (int j = 0; j < 2; ++j) {
            grad_mu[j] += u * s[j];
            grad_sigma[j] += u * (s[j] * s[j] - 1.0);
        }
    }

    StepOutcome out;
    out.state = state;
    for (int j = 0; j < 2; ++j) {
        out.state.mu[j] = std::max(
            state.mu[j] + hp.eta_mu * state.sigma[j] * grad_mu[j], 0.0);
        out.state.sigma[j] =
            state.sigma[j] * std::exp(hp.eta_sigma / 2.0 * grad_sigma[j]);
    }
    out.state.iteration = state.iteration + 1;

    int best = order[0];
    out.best_sample = projected[best];
    out.best_value = value[best];
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

FitResult fit_subvector(std::span<const float> v, Family family, int beta,
                        const SnesHyperparams& hp, std::uint64_t seed,
                        kernels::MathMode mode) {
    if (family == Family::uniform) {
        throw std::invalid_argument("fit_subvector: uniform has nothing to fit");
    }
    if (v.empty()) {
        throw std::invalid_argument("fit_subvector: empty vector");
    }

    Interval iv;
    iv.x_min = *std::min_element(v.begin(), v.end());
    iv.x_max = *std::max_element(v.begin(), v.end());

    FitResult fallback;
    fallback.params = Params{Family::uniform, 0.0f, 0.0f};
    fallback.objective = 1.0;
    fallback.converged = true;
    fallback.fell_back_to_uniform = true;
    if (iv.degenerate()) {
        return fallback;  // constant (sub)vector, nothing to gain
    }

    const double unif = recon_loss(
        kernels::prepare({Family::uniform, 0, 0}, iv, beta, mode), v);
    if (unif == 0.0) {
        return fallback;  // already exactly representable on the uniform grid
    }

    auto to_params = [&](const Vec2& z) {
        return Params{family, static_cast<float>(z[0]), static_cast<float>(z[1])};
    };
    Projection project = [&](const Vec2& z) -> Vec2 {
        Params p = project_params(to_params(z), iv);
        return {static_cast<double>(p.p1), static_cast<double>(p.p2)};
    };
    Objective objective = [&](const Vec2& z) -> double {
        double loss = recon_loss(kernels::prepare(to_params(z), iv, beta, mode), v);
        return loss == 0.0 ? std::numeric_limits<double>::infinity() : unif / loss;
    };

    SnesInit init = initial_snes_state(family);
    SnesState state{init.mu, init.sigma, 0};

    Vec2 best_z = project(state.mu);
    double best_value = objective(best_z);
    NormalSampler rng(seed);

    FitResult result;
    bool converged = false;
    while (state.iteration < hp.max_iters) {
        Vec2 prev_mu = state.mu;
        StepOutcome step = snes_step(state, objective, project, hp, rng);
        state = step.state;
        if (step.best_value > best_value) {
            best_value = step.best_value;
            best_z = step.best_sample;
        }
        // The updated mean is a candidate too.
        Vec2 mu_z = project(state.mu);
        double mu_value = objective(mu_z);
        if (mu_value > best_value) {
            best_value = mu_value;
            best_z = mu_z;
        }
        double diff = std::max(std::abs(state.mu[0] - prev_mu[0]),
                               std::abs(state.mu[1] - prev_mu[1]));
        if (state.iteration >= hp.min_iters && diff < hp.tol) {
            converged = true;
            break;
        }
    }

    result.iterations = state.iteration;
    result.converged = converged;
    if (best_value < 1.0) {
        fallback.iterations = state.iteration;
        fallback.converged = converged;
        return fallback;
    }
    result.params = to_params(best_z);
    result.objective = best_value;
    result.fell_back_to_uniform = false;
    return result;
}

}  // namespace nvq
