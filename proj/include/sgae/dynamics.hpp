#pragma once

// Orthogonal Procrustes alignment of per-period embeddings and cosine drift
// relative to each node's first-period position.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgae/matrix.hpp"

namespace sgae {

struct Alignment {
    Matrix rotation;                 // d x d orthogonal
    double residual = 0.0;           // ||source R - target||_F
    double unaligned_residual = 0.0; // ||source - target||_F
    bool underdetermined = false;    // fewer rows than columns
};

// R = argmin ||source R - target||_F over orthogonal R, via R = U V^T from the
// SVD of source^T target. No centering or scaling.
Alignment procrustes_align(const Matrix& source, const Matrix& target);

struct EmbeddingPeriod {
    std::string label;
    std::vector<std::string> node_names;
    Matrix z;  // one row per node name
};

// Periods in temporal order; alignment target is the first.
struct EmbeddingSeries {
    std::vector<EmbeddingPeriod> periods;

    void validate() const;
};

// Pearson correlation; nullopt if either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct DriftSeries {
    std::string node;
    std::vector<std::size_t> periods;  // indices into EmbeddingSeries::periods
    std::vector<double> cosines;       // cos(z_first, z_t R_t)
    std::optional<double> r;           // Pearson r of (period index, cosine)
};

struct DriftAnalysis {
    std::vector<Alignment> alignments;  // per period, onto the first
    std::vector<DriftSeries> series;    // eligible nodes, first-period order
    std::vector<std::string> notices;   // skipped nodes and degenerate cases
};

// Aligns every later period directly onto the first using the nodes shared
// with it. A node needs the first period and at least three periods overall;
// zero-norm embeddings are skipped with a notice.
DriftAnalysis analyze_drift(const EmbeddingSeries& series);

// Drift of one node; throws NotFound if the node is ineligible.
DriftSeries drift_series(const EmbeddingSeries& series, const std::string& node);

// Nodes with a defined r, ascending by r (ties by name).
std::vector<DriftSeries> drift_ranking(const DriftAnalysis& analysis);

// node, period, cosine
std::string drift_tsv(const DriftAnalysis& analysis, const EmbeddingSeries& series);
std::string drift_ranking_json(const DriftAnalysis& analysis);

}  // namespace sgae
