#include "nvq/synth.hpp"

#include <cmath>
#include <random>

#include "nvq/optimizer.hpp"

namespace nvq {

FloatMatrix synth_dataset(std::size_t n, std::uint32_t d, std::uint64_t seed) {
    FloatMatrix data;
    data.d = d;
    data.values.resize(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 engine(mix_seed(seed, i));
        auto uniform = [&] { return (engine() >> 11) * 0x1.0p-53; };
        NormalSampler normal(mix_seed(seed ^ 0x5eedf00dULL, i));

        double scale = std::exp(std::log(0.5) + uniform() * std::log(4.0));
        double tail = 0.15 + uniform() * 0.30;   // sinh stretch, varies kurtosis
        double skew = -0.25 + uniform() * 0.50;

        float* row = data.row_ptr(i);
        for (std::uint32_t j = 0; j < d; ++j) {
            double z = normal();
            double v = std::sinh(tail * z) / tail + 0.15 * skew * (z * z - 1.0);
            row[j] = static_cast<float>(scale * v);
        }
    }
    return data;
}

}  // namespace nvq
