#include "epivalue/kernels.h"

namespace epivalue::kernels {

namespace {

void matvec(const double *m, const double *x, double *y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double *row = m + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += row[j] * x[j];
        }
        y[i] = acc;
    }
}

void prevalence(const double *a, const double *b, const double *denom, double *out,
                std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = denom[i] > 0.0 ? (a[i] + b[i]) / denom[i] : 0.0;
    }
}

void scaled_product(const double *m, const double *x, double scale, double *out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = scale * m[i] * x[i];
    }
}

constexpr KernelTable table{Isa::scalar, &matvec, &prevalence, &scaled_product};

} // namespace

const KernelTable &scalar_kernels() noexcept { return table; }

} // namespace epivalue::kernels
