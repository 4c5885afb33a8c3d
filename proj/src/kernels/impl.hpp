#pragma once

#include "netdiff/kernels.hpp"

namespace netdiff::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(NETDIFF_HAVE_AVX2_TU)
extern const KernelTable kAvx2Table;
#endif

}  // namespace netdiff::kernels::detail
