#include "sgae/kernels.hpp"

#include <cmath>

namespace sgae::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_squares_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void relu_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_scalar(const double* x, double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!(x[i] > 0.0)) g[i] = 0.0;
}

void adam_step_scalar(double* w, double* m, double* v, const double* g, std::size_t n,
                      double lr, double b1, double b2, double bc1, double bc2, double eps,
                      double* denom) {
    const double c1 = 1.0 - b1;
    const double c2 = 1.0 - b2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + c1 * g[i];
        v[i] = b2 * v[i] + c2 * (g[i] * g[i]);
        const double d = std::sqrt(v[i] / bc2) + eps;
        w[i] -= lr * ((m[i] / bc1) / d);
        if (denom) denom[i] = d;
    }
}

}  // namespace

const KernelTable& scalar() {
    static const KernelTable table{"scalar",         dot_scalar,       sum_squares_scalar,
                                   axpy_scalar,      scale_scalar,     relu_scalar,
                                   relu_mask_scalar, adam_step_scalar};
    return table;
}

}  // namespace sgae::kernels
