#include "idsm/kernels.hpp"

#include <cmath>

namespace idsm::kernels {
namespace {

double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

double weighted_abs_sum_scalar(const double* w, const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::abs(a[i]);
    return s;
}

void multiply_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void multiply3_scalar(const double* a, const double* b, const double* c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i] * c[i];
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{weighted_dot_scalar, weighted_abs_sum_scalar, multiply_scalar,
                               axpy_scalar,         scale_scalar,            multiply3_scalar};
    return t;
}

}  // namespace idsm::kernels
