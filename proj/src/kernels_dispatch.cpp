#include "sgae/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace sgae::kernels {

#if SGAE_HAVE_AVX2
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2() {
#if SGAE_HAVE_AVX2
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& table = []() -> const KernelTable& {
        const char* forced = std::getenv("SGAE_KERNELS");
        if (forced && std::string_view(forced) == "scalar") return scalar();
        if (const KernelTable* t = avx2()) return *t;
        return scalar();
    }();
    return table;
}

}  // namespace sgae::kernels
