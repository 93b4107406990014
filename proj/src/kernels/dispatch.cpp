#include "epivalue/kernels.h"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace epivalue::kernels {

namespace detail {
#if defined(EPIVALUE_HAVE_AVX2)
const KernelTable &avx2_table() noexcept;
#endif
#if defined(EPIVALUE_HAVE_NEON)
const KernelTable &neon_table() noexcept;
#endif
} // namespace detail

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "scalar";
}

const KernelTable *avx2_kernels() noexcept {
#if defined(EPIVALUE_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable *neon_kernels() noexcept {
#if defined(EPIVALUE_HAVE_NEON)
    return &detail::neon_table();
#else
    return nullptr;
#endif
}

std::vector<const KernelTable *> available_kernels() {
    std::vector<const KernelTable *> out{&scalar_kernels()};
    if (auto *t = avx2_kernels()) out.push_back(t);
    if (auto *t = neon_kernels()) out.push_back(t);
    return out;
}

namespace {

const KernelTable &select_kernels() {
    const char *env = std::getenv("EPIVALUE_SIMD");
    const std::string wanted = env ? env : "auto";
    if (wanted == "scalar") {
        return scalar_kernels();
    }
    if (wanted == "avx2" || wanted == "auto") {
        if (auto *t = avx2_kernels()) return *t;
    }
    if (wanted == "neon" || wanted == "auto") {
        if (auto *t = neon_kernels()) return *t;
    }
    if (wanted != "auto") {
        spdlog::warn("EPIVALUE_SIMD={} is not available on this machine; using scalar kernels",
                     wanted);
    }
    return scalar_kernels();
}

} // namespace

const KernelTable &active_kernels() {
    static const KernelTable &table = select_kernels();
    return table;
}

} // namespace epivalue::kernels
