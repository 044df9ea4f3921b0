#pragma once

// Group-lasso penalty over the rows of the input weight matrix and its
// (weighted) proximal operator.
//
// The weighted prox solves, for one row w, threshold t and metric d > 0,
//
//     argmin_x  1/2 sum_i d_i (x_i - w_i)^2 + t ||x||_2 .
//
// The row is annihilated iff ||d * w||_2 <= t. Otherwise the solution is
// x_i = d_i w_i rho / (d_i rho + t) with rho = ||x||_2 the unique positive
// root of  phi(rho) = sum_i (d_i w_i / (d_i rho + t))^2 - 1,  which is convex
// and decreasing, so Newton-Raphson started below the root converges
// monotonically. With d = 1 this reduces to block soft-thresholding.

#include <cstddef>
#include <span>
#include <vector>

#include "sgae/matrix.hpp"

namespace sgae {

struct NewtonOptions {
    std::size_t max_iter = 100;
    double tol = 1e-10;
};

// sum_j ||w0_j||_2
double group_lasso_penalty(const Matrix& w0);

// max(0, 1 - t / ||row||) * row, in place.
void block_soft_threshold(std::span<double> row, double t);

// Weighted prox in place; returns the Newton iteration count (0 for the
// annihilation and uniform-metric shortcuts). Throws Numerical with the final
// residual if Newton-Raphson does not reach `tol` within `max_iter`.
std::size_t prox_group_row(std::span<double> row, double t, std::span<const double> diag,
                           const NewtonOptions& opt = {});

// Same solve but never takes the uniform-metric shortcut; used to check the
// Newton path against the closed form.
std::size_t prox_group_row_newton(std::span<double> row, double t, std::span<const double> diag,
                                  const NewtonOptions& opt = {});

// Row indices with ||w0_j||_2 > zero_tol.
std::vector<std::size_t> active_rows(const Matrix& w0, double zero_tol = 1e-12);

}  // namespace sgae
