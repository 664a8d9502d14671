#include "lgsum/kernels.hpp"

// Non-x86 build: no AVX2 lane available, dispatch stays on the scalar lane.

namespace lgsum::kernels {
const KernelTable* avx2_table() { return nullptr; }
} // namespace lgsum::kernels
