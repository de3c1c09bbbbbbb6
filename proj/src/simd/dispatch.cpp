#include <cstdlib>
#include <string_view>

#include "xaieval/simd/kernels.hpp"

namespace xaieval::simd {
namespace {

const KernelTable& select_kernels() noexcept {
    const char* forced = std::getenv("XAIEVAL_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") {
        return scalar_kernels();
    }
    if (const KernelTable* wide = avx2_kernels()) {
        return *wide;
    }
    return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() noexcept {
    static const KernelTable& table = select_kernels();
    return table;
}

}  // namespace xaieval::simd
