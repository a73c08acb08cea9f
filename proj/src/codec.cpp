#include "nvq/codec.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

#include "nvq/parallel.hpp"

namespace nvq {

std::vector<float> compute_mean(const FloatMatrix& data) {
    if (data.rows() == 0) {
        throw std::invalid_argument("compute_mean: empty dataset");
    }
    std::vector<double> acc(data.d, 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const float* row = data.row_ptr(i);
        for (std::uint32_t j = 0; j < data.d; ++j) acc[j] += row[j];
    }
    std::vector<float> mean(data.d);
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (std::uint32_t j = 0; j < data.d; ++j) {
        mean[j] = static_cast<float>(acc[j] * inv_n);
    }
    return mean;
}

std::vector<std::uint32_t> make_partition(std::uint32_t d, std::uint16_t m,
                                          std::uint64_t seed) {
    if (m != 1 && m != 2 && m != 4 && m != 8) {
        throw ConfigError("subvector count must be 1, 2, 4 or 8");
    }
    if (d == 0 || d % m != 0) {
        throw ConfigError("subvector count must divide the dimensionality");
    }
    std::vector<std::uint32_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0u);
    if (m == 1) return perm;  // a single group is partition-invariant
    std::mt19937_64 engine(seed);
    for (std::uint32_t i = d - 1; i > 0; --i) {
        std::uint32_t j = static_cast<std::uint32_t>(engine() % (i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

EncodedVector encode_vector(std::span<const float> x, const DatasetMeta& meta,
                            const SnesHyperparams& hp, std::uint64_t seed,
                            kernels::MathMode mode, FitAggregate* agg) {
    if (x.size() != meta.d) {
        throw std::invalid_argument("encode_vector: dimension mismatch");
    }
    const std::uint32_t L = meta.sub_len();
    std::vector<float> permuted(meta.d);
    for (std::uint32_t i = 0; i < meta.d; ++i) {
        permuted[i] = x[meta.permutation[i]] - meta.mean[meta.permutation[i]];
    }

    EncodedVector ev;
    ev.subs.resize(meta.m);
    std::vector<std::uint8_t> codes(meta.d, 0);
    double unif_total = 0.0, nvq_total = 0.0;

    for (std::uint16_t j = 0; j < meta.m; ++j) {
        std::span<const float> slice(permuted.data() + j * L, L);
        SubvectorInfo& sub = ev.subs[j];
        sub.interval.x_min = *std::min_element(slice.begin(), slice.end());
        sub.interval.x_max = *std::max_element(slice.begin(), slice.end());

        if (sub.interval.degenerate()) {
            sub.params = Params{Family::uniform, 0.0f, 0.0f};
            sub.fell_back = true;
            if (agg) ++agg->fallback_subvectors;
            continue;  // codes stay zero, decode yields the constant x_min
        }

        double unif = recon_loss(
            kernels::prepare({Family::uniform, 0, 0}, sub.interval, meta.beta, mode),
            slice);

        if (meta.family == Family::uniform) {
            sub.params = Params{Family::uniform, 0.0f, 0.0f};
            sub.fell_back = false;
            unif_total += unif;
            nvq_total += unif;
        } else {
            FitResult fit = fit_subvector(slice, meta.family, meta.beta, hp,
                                          mix_seed(seed, j), mode);
            sub.params = fit.params;
            sub.fell_back = fit.fell_back_to_uniform;
            if (agg) {
                if (fit.fell_back_to_uniform) {
                    ++agg->fallback_subvectors;
                } else {
                    ++agg->fitted_subvectors;
                }
                if (fit.iterations > 0) {
                    agg->iterations.push_back(fit.iterations);
                    if (fit.converged) ++agg->converged;
                }
            }
            double nvq = sub.fell_back
                             ? unif
                             : recon_loss(kernels::prepare(sub.params, sub.interval,
                                                           meta.beta, mode),
                                          slice);
            unif_total += unif;
            nvq_total += nvq;
        }

        Params qp = sub.fell_back ? Params{Family::uniform, 0.0f, 0.0f}
                                  : sub.params;
        kernels::PreparedQuantizer prep =
            kernels::prepare(qp, sub.interval, meta.beta, mode);
        kernels::kernel_ops(prep).quantize(prep, slice.data(), L, codes.data() + j * L);
    }

    if (agg) {
        agg->objective_sum += nvq_total > 0.0 ? unif_total / nvq_total : 1.0;
        ++agg->vectors;
    }
    ev.codes = pack_codes(codes, meta.beta);
    return ev;
}

std::vector<float> decode_vector(const EncodedVector& ev, const DatasetMeta& meta) {
    if (ev.subs.size() != meta.m || ev.codes.count != meta.d) {
        throw FormatError("decode_vector: vector does not match dataset meta");
    }
    const std::uint32_t L = meta.sub_len();
    std::vector<std::uint8_t> codes = unpack_codes(ev.codes);
    std::vector<float> permuted(meta.d);
    for (std::uint16_t j = 0; j < meta.m; ++j) {
        const SubvectorInfo& sub = ev.subs[j];
        float* out = permuted.data() + j * L;
        if (sub.interval.degenerate()) {
            std::fill_n(out, L, sub.interval.x_min);
            continue;
        }
        Params qp = sub.fell_back ? Params{Family::uniform, 0.0f, 0.0f}
                                  : sub.params;
        kernels::PreparedQuantizer prep =
            kernels::prepare(qp, sub.interval, meta.beta);
        kernels::kernel_ops(prep).dequantize(prep, codes.data() + j * L, L, out);
    }
    std::vector<float> x(meta.d);
    for (std::uint32_t i = 0; i < meta.d; ++i) {
        x[meta.permutation[i]] = permuted[i] + meta.mean[meta.permutation[i]];
    }
    return x;
}

EncodedDataset encode_dataset(const FloatMatrix& data, const EncodeConfig& cfg,
                              FitAggregate* agg) {
    if (data.rows() == 0) throw std::invalid_argument("encode_dataset: empty dataset");
    EncodedDataset enc;
    enc.meta.d = data.d;
    enc.meta.n = data.rows();
    enc.meta.m = cfg.m;
    enc.meta.beta = static_cast<std::uint8_t>(cfg.beta);
    enc.meta.family = cfg.family;
    enc.meta.partition_seed = cfg.seed;
    enc.meta.mean = compute_mean(data);
    enc.meta.permutation = make_partition(data.d, cfg.m, cfg.seed);
    if (cfg.beta != 4 && cfg.beta != 8) throw ConfigError("beta must be 4 or 8");

    enc.vectors.resize(data.rows());
    std::mutex agg_mutex;
    parallel_for(data.rows(), cfg.threads, [&](std::size_t i) {
        FitAggregate local;
        enc.vectors[i] = encode_vector(data.row(i), enc.meta, cfg.hp,
                                       mix_seed(cfg.seed, i), cfg.mode,
                                       agg ? &local : nullptr);
        if (agg) {
            std::lock_guard<std::mutex> lock(agg_mutex);
            agg->objective_sum += local.objective_sum;
            agg->vectors += local.vectors;
            agg->fitted_subvectors += local.fitted_subvectors;
            agg->fallback_subvectors += local.fallback_subvectors;
            agg->converged += local.converged;
            agg->iterations.insert(agg->iterations.end(),
                                   local.iterations.begin(),
                                   local.iterations.end());
        }
    });
    return enc;
}

FloatMatrix decode_dataset(const EncodedDataset& enc, int threads) {
    FloatMatrix out;
    out.d = enc.meta.d;
    out.values.resize(enc.meta.d * enc.vectors.size());
    parallel_for(enc.vectors.size(), threads, [&](std::size_t i) {
        std::vector<float> x = decode_vector(enc.vectors[i], enc.meta);
        std::copy(x.begin(), x.end(), out.row_ptr(i));
    });
    return out;
}

}  // namespace nvq
