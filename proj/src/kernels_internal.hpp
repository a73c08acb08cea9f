#pragma once

#include "nvq/kernels.hpp"

namespace nvq::kernels {

const KernelOps& scalar_fast_ops(Family family);
const KernelOps& exact_ops(Family family);
#ifdef NVQ_HAVE_AVX2_BUILD
const KernelOps& avx2_fast_ops(Family family);
#endif

}  // namespace nvq::kernels
