#include "sgae/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "sgae/error.hpp"
#include "sgae/gae.hpp"

namespace sgae {

namespace {

std::pair<std::size_t, std::size_t> class_counts(std::span<const double> scores, std::span<const double> labels,
                                                 const char* who) {
    if (scores.size() != labels.size()) throw Error(ErrorKind::InvalidArgument, std::string(who) + ": length mismatch");
    std::size_t pos = 0;
    for (double y : labels) {
        if (y != 0.0 && y != 1.0) throw Error(ErrorKind::InvalidArgument, std::string(who) + ": labels must be 0 or 1");
        pos += y == 1.0;
    }
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorKind::InvalidArgument, std::string(who) + ": both classes must be present");
    return {pos, neg};
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
    const auto [pos, neg] = class_counts(scores, labels, "auc");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Twice the positive rank sum, with midranks for tied groups, keeps every
    // quantity an integer until the final division.
    double twice_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double twice_mid = static_cast<double>(i + 1 + j);  // 2 * average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1.0) twice_rank_sum += twice_mid;
        i = j;
    }
    const double p = static_cast<double>(pos);
    const double twice_u = twice_rank_sum - p * (p + 1.0);
    return (twice_u / 2.0) / (p * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, std::span<const double> labels) {
    const auto [pos, neg] = class_counts(scores, labels, "average_precision");
    (void)neg;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double total = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]] != 1.0) continue;
        ++hits;
        total += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    return total / static_cast<double>(pos);
}

Metrics compute_metrics(std::span<const double> scores, std::span<const double> labels) {
    const auto [pos, neg] = class_counts(scores, labels, "metrics");
    return {auc(scores, labels), average_precision(scores, labels), pos, neg};
}

Metrics evaluate_pairs(const Matrix& z, std::span<const Edge> positives, std::span<const Edge> negatives) {
    if (positives.empty() || negatives.empty())
        throw Error(ErrorKind::InvalidArgument, "evaluate: split part has no positives or no negatives");
    std::vector<Edge> pairs(positives.begin(), positives.end());
    pairs.insert(pairs.end(), negatives.begin(), negatives.end());
    std::vector<double> labels(positives.size(), 1.0);
    labels.resize(pairs.size(), 0.0);
    const auto scores = decode_pairs(z, pairs);
    return compute_metrics(scores, labels);
}

}  // namespace sgae
