#pragma once

// Data-parallel inner loops of the simulator. Each instruction set provides the
// same table of kernels; the scalar one is the reference the others are tested
// against.

#include <cstddef>
#include <string_view>
#include <vector>

namespace epivalue::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;

    /// y = M x with M row-major n x n.
    void (*matvec)(const double *m, const double *x, double *y, std::size_t n);

    /// out[i] = (a[i] + b[i]) / denom[i], or 0 where denom[i] <= 0.
    void (*prevalence)(const double *a, const double *b, const double *denom, double *out,
                       std::size_t n);

    /// out[i] = scale * m[i] * x[i] (elementwise, length n).
    void (*scaled_product)(const double *m, const double *x, double scale, double *out,
                           std::size_t n);
};

const KernelTable &scalar_kernels() noexcept;

/// Null when the ISA was not compiled in or the CPU lacks it.
const KernelTable *avx2_kernels() noexcept;
const KernelTable *neon_kernels() noexcept;

/// Every table usable on this machine, scalar first.
std::vector<const KernelTable *> available_kernels();

/// Best table for this CPU, overridable with EPIVALUE_SIMD=scalar|avx2|neon.
/// Resolved once per process.
const KernelTable &active_kernels();

} // namespace epivalue::kernels
