// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include "epivalue/kernels.h"

#include <immintrin.h>

namespace epivalue::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void matvec(const double *m, const double *x, double *y, std::size_t n) {
    const std::size_t vec_end = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n; ++i) {
        const double *row = m + i * n;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j < vec_end; j += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc);
        }
        double sum = hsum(acc);
        for (; j < n; ++j) {
            sum += row[j] * x[j];
        }
        y[i] = sum;
    }
}

void prevalence(const double *a, const double *b, const double *denom, double *out,
                std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_loadu_pd(denom + i);
        const __m256d num = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d positive = _mm256_cmp_pd(d, zero, _CMP_GT_OQ);
        // Divide by 1 in masked lanes so no inf/nan is produced before blending.
        const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), d, positive);
        _mm256_storeu_pd(out + i, _mm256_and_pd(_mm256_div_pd(num, safe), positive));
    }
    for (; i < n; ++i) {
        out[i] = denom[i] > 0.0 ? (a[i] + b[i]) / denom[i] : 0.0;
    }
}

void scaled_product(const double *m, const double *x, double scale, double *out, std::size_t n) {
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_mul_pd(s, _mm256_loadu_pd(m + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(v, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) {
        out[i] = scale * m[i] * x[i];
    }
}

constexpr KernelTable table{Isa::avx2, &matvec, &prevalence, &scaled_product};

} // namespace

const KernelTable &avx2_table() noexcept { return table; }

} // namespace epivalue::kernels::detail
