// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.
// Element-wise kernels use separate mul/add so they round exactly like the
// scalar reference; reductions keep four partial sums and differ from the
// scalar result only by summation order.

#include "idsm/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace idsm::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double weighted_dot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
        acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        acc0 = _mm256_fmadd_pd(p, _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

double weighted_abs_sum_avx2(const double* w, const double* a, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d av = _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), av, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * std::abs(a[i]);
    return s;
}

void multiply_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) {
        double prod = alpha * x[i];
        y[i] = y[i] + prod;
    }
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
    for (; i < n; ++i) x[i] *= alpha;
}

void multiply3_avx2(const double* a, const double* b, const double* c, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(ab, _mm256_loadu_pd(c + i)));
    }
    for (; i < n; ++i) {
        double ab = a[i] * b[i];
        out[i] = ab * c[i];
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable t{weighted_dot_avx2, weighted_abs_sum_avx2, multiply_avx2,
                               axpy_avx2,         scale_avx2,            multiply3_avx2};
    return &t;
}

}  // namespace idsm::kernels
