// Compiled only on AArch64, where NEON is part of the baseline ISA.
#include "epivalue/kernels.h"

#include <arm_neon.h>

namespace epivalue::kernels::detail {

namespace {

void matvec(const double *m, const double *x, double *y, std::size_t n) {
    const std::size_t vec_end = n & ~std::size_t{1};
    for (std::size_t i = 0; i < n; ++i) {
        const double *row = m + i * n;
        float64x2_t acc = vdupq_n_f64(0.0);
        std::size_t j = 0;
        for (; j < vec_end; j += 2) {
            acc = vfmaq_f64(acc, vld1q_f64(row + j), vld1q_f64(x + j));
        }
        double sum = vaddvq_f64(acc);
        for (; j < n; ++j) {
            sum += row[j] * x[j];
        }
        y[i] = sum;
    }
}

void prevalence(const double *a, const double *b, const double *denom, double *out,
                std::size_t n) {
    std::size_t i = 0;
    const float64x2_t zero = vdupq_n_f64(0.0);
    const float64x2_t one = vdupq_n_f64(1.0);
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vld1q_f64(denom + i);
        const uint64x2_t positive = vcgtq_f64(d, zero);
        const float64x2_t safe = vbslq_f64(positive, d, one);
        const float64x2_t q = vdivq_f64(vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), safe);
        vst1q_f64(out + i, vbslq_f64(positive, q, zero));
    }
    for (; i < n; ++i) {
        out[i] = denom[i] > 0.0 ? (a[i] + b[i]) / denom[i] : 0.0;
    }
}

void scaled_product(const double *m, const double *x, double scale, double *out, std::size_t n) {
    std::size_t i = 0;
    const float64x2_t s = vdupq_n_f64(scale);
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vmulq_f64(vmulq_f64(s, vld1q_f64(m + i)), vld1q_f64(x + i)));
    }
    for (; i < n; ++i) {
        out[i] = scale * m[i] * x[i];
    }
}

constexpr KernelTable table{Isa::neon, &matvec, &prevalence, &scaled_product};

} // namespace

const KernelTable &neon_table() noexcept { return table; }

} // namespace epivalue::kernels::detail
