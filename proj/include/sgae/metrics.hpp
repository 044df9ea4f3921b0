#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgae/graph.hpp"

namespace sgae {

struct Metrics {
    double auc = 0.0;
    double ap = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// Mann-Whitney AUC: P(score_pos > score_neg) with ties counted one half.
// Throws InvalidArgument unless both classes are present.
double auc(std::span<const double> scores, std::span<const double> labels);

// Mean precision at the rank of each positive. Items are ranked by
// descending score; equal scores keep input order.
double average_precision(std::span<const double> scores, std::span<const double> labels);

Metrics compute_metrics(std::span<const double> scores, std::span<const double> labels);

// Scores positives and negatives with logistic(z_i . z_j).
Metrics evaluate_pairs(const Matrix& z, std::span<const Edge> positives, std::span<const Edge> negatives);

}  // namespace sgae
