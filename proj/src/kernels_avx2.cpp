// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached through the
// dispatch table after a CPUID check.

#include "sgae/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace sgae::kernels::detail {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
    }
    for (; i + 4 <= n; i += 4)
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void relu_avx2(const double* x, double* y, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d keep = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_and_pd(vx, keep));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_avx2(const double* x, double* g, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), keep));
    }
    for (; i < n; ++i)
        if (!(x[i] > 0.0)) g[i] = 0.0;
}

void adam_step_avx2(double* w, double* m, double* v, const double* g, std::size_t n, double lr,
                    double b1, double b2, double bc1, double bc2, double eps, double* denom) {
    const double c1 = 1.0 - b1;
    const double c2 = 1.0 - b2;
    const __m256d vb1 = _mm256_set1_pd(b1), vb2 = _mm256_set1_pd(b2);
    const __m256d vc1 = _mm256_set1_pd(c1), vc2 = _mm256_set1_pd(c2);
    const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
    const __m256d veps = _mm256_set1_pd(eps), vlr = _mm256_set1_pd(lr);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vc1, vg));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(vc2, _mm256_mul_pd(vg, vg)));
        const __m256d d = _mm256_add_pd(_mm256_sqrt_pd(_mm256_div_pd(vv, vbc2)), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(_mm256_div_pd(vm, vbc1), d));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
        if (denom) _mm256_storeu_pd(denom + i, d);
    }
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + c1 * g[i];
        v[i] = b2 * v[i] + c2 * (g[i] * g[i]);
        const double d = std::sqrt(v[i] / bc2) + eps;
        w[i] -= lr * ((m[i] / bc1) / d);
        if (denom) denom[i] = d;
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{"avx2",         dot_avx2,       sum_squares_avx2,
                                   axpy_avx2,      scale_avx2,     relu_avx2,
                                   relu_mask_avx2, adam_step_avx2};
    return table;
}

}  // namespace sgae::kernels::detail
