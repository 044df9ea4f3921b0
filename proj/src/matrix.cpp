#include "sgae/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "sgae/error.hpp"
#include "sgae/kernels.hpp"

namespace sgae {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw Error(ErrorKind::InvalidArgument, "matmul: inner dimensions differ");
    const auto& k = kernels::active();
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double aip = a(i, p);
            if (aip != 0.0) k.axpy(aip, b.row(p).data(), ci, b.cols());
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw Error(ErrorKind::InvalidArgument, "matmul_tn: row counts differ");
    const auto& k = kernels::active();
    Matrix c(a.cols(), b.cols());
    for (std::size_t p = 0; p < a.rows(); ++p) {
        const double* bp = b.row(p).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double api = a(p, i);
            if (api != 0.0) k.axpy(api, bp, c.row(i).data(), b.cols());
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw Error(ErrorKind::InvalidArgument, "matmul_nt: column counts differ");
    const auto& k = kernels::active();
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "dot: length mismatch");
    return kernels::active().dot(x.data(), y.data(), x.size());
}

double norm2(std::span<const double> x) { return std::sqrt(kernels::active().sum_squares(x.data(), x.size())); }

double frobenius_norm(const Matrix& a) { return norm2(a.values()); }

std::size_t fingerprint(const Matrix& a, std::size_t seed) {
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const std::uint64_t shape[2] = {a.rows(), a.cols()};
    mix(shape, sizeof shape);
    mix(a.data(), a.size() * sizeof(double));
    return static_cast<std::size_t>(h);
}

}  // namespace sgae
