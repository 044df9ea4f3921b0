#pragma once

// Planted-polarization generator: a stochastic block model graph with concept
// signals whose block dependence is known, so selection and link prediction
// can be scored against ground truth.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgae/features.hpp"
#include "sgae/graph.hpp"

namespace sgae {

struct PlantedKind {
    SignalKind kind = SignalKind::Agenda;  // Agenda, Framing or Mixed (both)
    std::size_t foundation = 0;            // framing foundation for Framing/Mixed
};

struct PlantedConfig {
    std::size_t n_nodes = 60;
    std::size_t n_blocks = 2;
    double p_in = 0.5;
    double p_out = 0.05;
    std::size_t n_concepts = 50;
    std::size_t n_informative = 10;
    // One entry per informative concept; empty cycles agenda, framing, mixed
    // with foundations 0, 1, 2, ...
    std::vector<PlantedKind> kinds;
    // Framing: Gaussian std of every s_k value. Counts: log-normal jitter of
    // the Poisson mean.
    double noise_std = 0.3;
    // Poisson mean of a concept's count in a node.
    double base_count = 20.0;
    // Count mean multiplier in the concept's favoured block(s).
    double agenda_lift = 1.15;
    // Framing mean is +shift in favoured blocks and -shift elsewhere.
    double framing_shift = 0.075;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlantedTruth {
    std::vector<std::size_t> block;                // per node
    std::vector<std::size_t> informative;          // concept indices, ascending
    std::vector<PlantedKind> kinds;                // parallel to informative
    std::vector<std::vector<bool>> favoured;       // [informative][block]
};

struct PlantedData {
    Graph graph;
    FeatureBundle features;
    PlantedTruth truth;
};

PlantedData generate_planted(const PlantedConfig& cfg);

// The two-clique toy: 8 nodes in two 4-cliques, 10 concepts, one of which
// carries a block-aligned framing signal.
PlantedConfig two_clique_toy(std::uint64_t seed = 0);

struct RecoveryMetrics {
    std::optional<double> precision;  // undefined for an empty selection
    double recall = 0.0;
};

RecoveryMetrics recovery_metrics(const std::vector<std::size_t>& selected, const PlantedTruth& truth);

std::string truth_to_json(const PlantedTruth& truth);
std::string planted_config_to_json(const PlantedConfig& cfg);
// Unknown keys are rejected.
PlantedConfig planted_config_from_json(const std::string& text, PlantedConfig defaults = {});

}  // namespace sgae
