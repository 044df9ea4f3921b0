#pragma once

// Backboning of weighted co-participation networks and modularity-based
// polarization scores against degree-preserving nulls.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgae/graph.hpp"
#include "sgae/matrix.hpp"

namespace sgae {

struct WeightedNetwork {
    std::vector<std::string> node_names;
    Matrix weights;  // symmetric, zero diagonal, non-negative

    std::size_t node_count() const noexcept { return node_names.size(); }
    // W: sum over unordered pairs.
    double total_weight() const;
    double strength(std::size_t i) const;
    // Throws Format on asymmetry, negative weights or a non-zero diagonal.
    void validate() const;
};

struct ActivityRecord {
    std::string user;
    std::string node;
    double comments = 0.0;
};

// weight(i, j) = number of users with at least `min_comments` comments in both
// i and j. Nodes are every node named in the records, in sorted order.
WeightedNetwork cooccurrence_weights(std::span<const ActivityRecord> activity, double min_comments = 10.0);

// Binomial noise-corrected filter: keep (i, j) iff w_ij > mu_ij + delta * sigma_ij
// with p = (s_i / W)(s_j / W), mu = W p, sigma = sqrt(W p (1 - p)).
Graph noise_corrected_filter(const WeightedNetwork& w, double delta);

struct KneeResult {
    std::size_t index = 0;
    bool degenerate = false;  // flat or linear curve: index 0 returned
};

// Basic difference-curve Kneedle over points given in candidate order. Both
// axes are min-max normalized and the maximum of y_norm - x_norm wins; ties go
// to the earlier point.
KneeResult kneedle(std::span<const double> x, std::span<const double> y);

struct KneePoint {
    double delta = 0.0;
    double edge_fraction = 0.0;
    double node_fraction = 0.0;
};

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double mean_degree = 0.0;
    double density = 0.0;
    std::size_t largest_component = 0;
    // Mean over ordered pairs within the largest component; 0 for one node.
    double mean_shortest_path = 0.0;
};

GraphStats graph_stats(const Graph& g);

struct BackboneReport {
    Graph graph;  // kept edges over the non-isolated nodes
    double delta_used = 0.0;
    bool knee_degenerate = false;
    std::vector<KneePoint> knee_curve;
    GraphStats stats;
};

// Filters at every candidate delta (ascending, at least 4) and keeps the one
// at the knee of edges-kept versus nodes-kept.
BackboneReport backbone(const WeightedNetwork& w, std::span<const double> deltas);

// Default candidate grid 0, 0.1, ..., 5.
std::vector<double> default_deltas();

// Sum over communities of e_c / m - (d_c / 2m)^2; 0 for an edgeless graph.
double modularity(const Graph& g, std::span<const std::size_t> partition);

struct ModularityResult {
    std::vector<std::size_t> partition;  // community id per node, first-seen order
    double q = 0.0;
    double null_mean = 0.0;
    double null_std = 0.0;
    double z_score = 0.0;
    bool z_defined = false;
    std::vector<double> null_qs;
    bool degrees_preserved = true;
};

// Louvain local moves and aggregation, with a seeded node visiting order.
ModularityResult louvain_modularity(const Graph& g, std::uint64_t seed = 0);

// Randomizes g by `attempts` double-edge swap attempts; returns accepted swaps.
std::size_t double_edge_swap(std::vector<Edge>& edges, std::size_t attempts, std::uint64_t seed);

// Louvain Q of g against Louvain Q of n_shuffles degree-preserving shuffles,
// each using 10 |E| swap attempts.
ModularityResult degree_preserving_null(const Graph& g, std::size_t n_shuffles, std::uint64_t seed,
                                        std::size_t jobs = 1);

// TSV rows node_i, node_j, weight; an optional header row is skipped. Repeated
// pairs accumulate.
WeightedNetwork parse_weighted_tsv(const std::string& text);
// TSV rows user, node, comments; an optional header row is skipped.
std::vector<ActivityRecord> parse_activity_tsv(const std::string& text);

std::string backbone_report_to_json(const BackboneReport& r);
std::string modularity_to_json(const ModularityResult& r, const Graph& g);

}  // namespace sgae
