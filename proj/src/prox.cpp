#include "sgae/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sgae/error.hpp"
#include "sgae/kernels.hpp"

namespace sgae {

double group_lasso_penalty(const Matrix& w0) {
    double total = 0.0;
    for (std::size_t j = 0; j < w0.rows(); ++j) total += norm2(w0.row(j));
    return total;
}

namespace {

// Rows whose shrink factor 1 - t/||row|| is within rounding of zero are
// annihilated exactly.
constexpr double kAnnihilateRelTol = 1e-14;

}  // namespace

void block_soft_threshold(std::span<double> row, double t) {
    const double n = norm2(row);
    if (n <= t * (1.0 + kAnnihilateRelTol)) {
        std::fill(row.begin(), row.end(), 0.0);
        return;
    }
    kernels::active().scale(1.0 - t / n, row.data(), row.size());
}

namespace {

// Largest of ||w_S|| - t / min_{i in S} d_i over the prefixes S of the
// coordinates sorted by decreasing d. Dropping coordinates can only lower the
// root, and a uniform metric equal to the prefix minimum lowers it further, so
// every candidate is a valid lower bound.
double root_lower_bound(std::span<const double> w, double t, std::span<const double> d) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    double sq = 0.0;
    double best = 0.0;
    for (std::size_t i : order) {
        sq += w[i] * w[i];
        best = std::max(best, std::sqrt(sq) - t / d[i]);
    }
    return best;
}

std::size_t newton_solve(std::span<double> w, double t, std::span<const double> d, const NewtonOptions& opt) {
    double rho = root_lower_bound(w, t, d);
    double residual = 0.0;
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        double phi = -1.0;
        double dphi = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double denom = d[i] * rho + t;
            const double q = d[i] * w[i] / denom;
            phi += q * q;
            dphi -= 2.0 * q * q * d[i] / denom;
        }
        residual = phi;
        if (phi == 0.0 || dphi == 0.0) {
            rho = std::max(rho, 0.0);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = d[i] * w[i] * rho / (d[i] * rho + t);
            return it;
        }
        const double step = phi / dphi;
        rho -= step;
        if (std::abs(step) <= opt.tol * std::max(1.0, std::abs(rho))) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = d[i] * w[i] * rho / (d[i] * rho + t);
            return it;
        }
    }
    std::ostringstream msg;
    msg << "prox_group_row: Newton-Raphson did not converge in " << opt.max_iter << " iterations (residual "
        << residual << ")";
    throw Error(ErrorKind::Numerical, msg.str());
}

void check_args(std::span<double> row, double t, std::span<const double> diag) {
    if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "prox_group_row: threshold must be >= 0");
    if (diag.size() != row.size()) throw Error(ErrorKind::InvalidArgument, "prox_group_row: diag length mismatch");
    for (double x : diag)
        if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgument, "prox_group_row: diag entries must be > 0");
}

// Returns true when the row was fully handled (t == 0 or annihilation).
bool trivial_cases(std::span<double> row, double t, std::span<const double> diag) {
    if (t == 0.0) return true;
    const double m = *std::max_element(diag.begin(), diag.end());
    double sq = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const double x = (diag[i] / m) * row[i];
        sq += x * x;
    }
    if (m * std::sqrt(sq) <= t * (1.0 + kAnnihilateRelTol)) {
        std::fill(row.begin(), row.end(), 0.0);
        return true;
    }
    return false;
}

}  // namespace

std::size_t prox_group_row(std::span<double> row, double t, std::span<const double> diag, const NewtonOptions& opt) {
    check_args(row, t, diag);
    if (trivial_cases(row, t, diag)) return 0;
    if (std::all_of(diag.begin(), diag.end(), [&](double x) { return x == diag.front(); })) {
        block_soft_threshold(row, t / diag.front());
        return 0;
    }
    return newton_solve(row, t, diag, opt);
}

std::size_t prox_group_row_newton(std::span<double> row, double t, std::span<const double> diag,
                                  const NewtonOptions& opt) {
    check_args(row, t, diag);
    if (trivial_cases(row, t, diag)) return 0;
    return newton_solve(row, t, diag, opt);
}

std::vector<std::size_t> active_rows(const Matrix& w0, double zero_tol) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < w0.rows(); ++j)
        if (norm2(w0.row(j)) > zero_tol) out.push_back(j);
    return out;
}

}  // namespace sgae
