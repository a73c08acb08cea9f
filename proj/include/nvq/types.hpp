#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvq {

enum class Family : std::uint8_t {
    uniform = 0,
    kumaraswamy = 1,
    loglog = 2,
    nqt = 3,
};

const char* family_name(Family f);
// Parses "uniform" / "kumaraswamy" / "loglog" / "nqt"; throws ConfigError.
Family family_from_name(const std::string& name);

// Normalization range of one (sub)vector, in the units of the input values.
struct Interval {
    float x_min = 0.0f;
    float x_max = 0.0f;

    float width() const { return x_max - x_min; }
    // A collapsed range means the (sub)vector is constant; the codec encodes
    // it with all-zero codes instead of going through a nonlinearity.
    bool degenerate() const { return !(x_min < x_max); }
};

// Learned nonlinearity parameters. For Kumaraswamy, p1 = a and p2 = b.
// For the sigmoid families (loglog, nqt), p1 = alpha and p2 = x0, where x0
// lives in width-scaled units (the domain the sigmoid actually sees).
// Uniform ignores both.
struct Params {
    Family family = Family::uniform;
    float p1 = 0.0f;
    float p2 = 0.0f;
};

// Error taxonomy; the CLI maps these to distinct exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Signals that an operation required x_min < x_max.
struct DegenerateIntervalError : std::domain_error {
    using std::domain_error::domain_error;
};

// Dense row-major collection of same-dimension vectors.
struct FloatMatrix {
    std::uint32_t d = 0;
    std::vector<float> values;

    std::size_t rows() const { return d == 0 ? 0 : values.size() / d; }
    const float* row_ptr(std::size_t i) const { return values.data() + i * d; }
    float* row_ptr(std::size_t i) { return values.data() + i * d; }
    std::span<const float> row(std::size_t i) const { return {row_ptr(i), d}; }
};

}  // namespace nvq
