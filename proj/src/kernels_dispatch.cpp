#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace nvq::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(NVQ_HAVE_AVX2_BUILD) && (defined(__x86_64__) || defined(__amd64__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect_isa() {
    if (const char* env = std::getenv("NVQ_ISA")) {
        std::string s(env);
        if (s == "scalar") return Isa::scalar;
        if (s == "avx2" && cpu_has_avx2()) return Isa::avx2;
        return Isa::scalar;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

Isa& isa_state() {
    static Isa isa = detect_isa();
    return isa;
}

}  // namespace

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
    }
    return false;
}

Isa active_isa() { return isa_state(); }

void set_isa(Isa isa) {
    if (!isa_available(isa)) {
        throw ConfigError("requested instruction set is not available on this machine/build");
    }
    isa_state() = isa;
}

const KernelOps& kernel_ops(Family family, MathMode mode, Isa isa) {
    if (mode == MathMode::exact) {
        return exact_ops(family);  // exact lane is scalar only
    }
#ifdef NVQ_HAVE_AVX2_BUILD
    if (isa == Isa::avx2 && cpu_has_avx2()) {
        return avx2_fast_ops(family);
    }
#else
    (void)isa;
#endif
    return scalar_fast_ops(family);
}

const KernelOps& kernel_ops(const PreparedQuantizer& prep) {
    return kernel_ops(prep.family, prep.mode, active_isa());
}

}  // namespace nvq::kernels
