#pragma once

// Data-parallel inner loops used by the dense algebra in this project.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA implementation. The active table is chosen once at startup from
// CPUID; setting SGAE_KERNELS=scalar in the environment forces the reference
// path. Elementwise kernels produce bit-identical results on both paths;
// reductions (dot, sum_squares) differ only in summation order.

#include <cstddef>
#include <string_view>

namespace sgae::kernels {

struct KernelTable {
    std::string_view name;

    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i x[i]^2
    double (*sum_squares)(const double* x, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);
    // y[i] = max(x[i], 0)
    void (*relu)(const double* x, double* y, std::size_t n);
    // g[i] = x[i] > 0 ? g[i] : 0
    void (*relu_mask)(const double* x, double* g, std::size_t n);
    // One Adam moment update followed by the bias-corrected parameter step.
    // m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g
    // denom = sqrt(v / bc2) + eps;  w -= lr * (m / bc1) / denom
    // denom is written out when non-null (the proximal step reuses it).
    void (*adam_step)(double* w, double* m, double* v, const double* g, std::size_t n,
                      double lr, double b1, double b2, double bc1, double bc2, double eps,
                      double* denom);
};

const KernelTable& scalar();

// AVX2/FMA table, or nullptr when the CPU or build lacks support.
const KernelTable* avx2();

// Table used by the rest of the library.
const KernelTable& active();

}  // namespace sgae::kernels
