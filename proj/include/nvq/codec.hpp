#pragma once

// Dataset-level pipeline: centering, random subvector partition, per-vector
// encode/decode and the in-memory compressed representation.

#include <cstdint>
#include <span>
#include <vector>

#include "nvq/optimizer.hpp"
#include "nvq/quantizer.hpp"
#include "nvq/types.hpp"

namespace nvq {

struct DatasetMeta {
    std::uint32_t d = 0;
    std::uint64_t n = 0;
    std::uint16_t m = 1;     // subvector count; must divide d
    std::uint8_t beta = 8;
    Family family = Family::uniform;
    std::uint64_t partition_seed = 0;
    std::vector<float> mean;                // length d
    std::vector<std::uint32_t> permutation; // bijection on [0, d)

    std::uint32_t sub_len() const { return d / m; }
};

struct SubvectorInfo {
    Interval interval;
    Params params;
    // The fit did not beat uniform quantization (or the slice is constant);
    // codes decode through the uniform map.
    bool fell_back = false;
};

struct EncodedVector {
    std::vector<SubvectorInfo> subs;  // m entries
    CodeBlock codes;                  // d codes, subvector-major
};

struct EncodedDataset {
    DatasetMeta meta;
    std::vector<EncodedVector> vectors;
};

// Arithmetic mean over all vectors, accumulated in double.
std::vector<float> compute_mean(const FloatMatrix& data);

// Seeded uniform random permutation of [0, d); subvector j owns positions
// [j*d/m, (j+1)*d/m). m = 1 yields the identity. Throws ConfigError if m
// does not divide d or m is not in {1, 2, 4, 8}.
std::vector<std::uint32_t> make_partition(std::uint32_t d, std::uint16_t m,
                                          std::uint64_t seed);

struct FitAggregate {
    double objective_sum = 0.0;   // vector-level ratio sum
    std::size_t vectors = 0;
    std::size_t fitted_subvectors = 0;
    std::size_t fallback_subvectors = 0;
    std::vector<int> iterations;  // one entry per actual SNES fit
    std::size_t converged = 0;

    double mean_objective() const {
        return vectors ? objective_sum / static_cast<double>(vectors) : 1.0;
    }
    double fallback_fraction() const {
        std::size_t total = fitted_subvectors + fallback_subvectors;
        return total ? static_cast<double>(fallback_subvectors) / total : 0.0;
    }
};

// Centers, permutes, splits and fits a single vector. `seed` must be unique
// per vector for independent fits; subvector j uses mix_seed(seed, j).
EncodedVector encode_vector(std::span<const float> x, const DatasetMeta& meta,
                            const SnesHyperparams& hp, std::uint64_t seed,
                            kernels::MathMode mode = kernels::MathMode::fast,
                            FitAggregate* agg = nullptr);

// Inverse pipeline: dequantize, undo the permutation, re-add the mean.
std::vector<float> decode_vector(const EncodedVector& ev, const DatasetMeta& meta);

struct EncodeConfig {
    Family family = Family::loglog;
    int beta = 8;
    std::uint16_t m = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    kernels::MathMode mode = kernels::MathMode::fast;
    SnesHyperparams hp{};
};

EncodedDataset encode_dataset(const FloatMatrix& data, const EncodeConfig& cfg,
                              FitAggregate* agg = nullptr);
FloatMatrix decode_dataset(const EncodedDataset& enc, int threads = 1);

}  // namespace nvq
