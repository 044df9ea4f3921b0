#pragma once

// Shared fixtures for the unit tests and the acceptance runner: brute-force
// metric references, a finite-difference gradient checker, and the planted
// benchmark settings.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sgae/features.hpp"
#include "sgae/gae.hpp"
#include "sgae/graph.hpp"
#include "sgae/rng.hpp"
#include "sgae/synth.hpp"
#include "sgae/train.hpp"

namespace sgae::testing {

// ---------------------------------------------------------------- metrics

// All (pos, neg) pairs: 1 for pos > neg, 1/2 for a tie.
inline double brute_auc(const std::vector<double>& s, const std::vector<double>& y) {
    double twice = 0.0, p = 0.0, n = 0.0;
    for (double v : y) (v == 1.0 ? p : n) += 1.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1.0) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] == 1.0) continue;
            twice += s[i] > s[j] ? 2.0 : (s[i] == s[j] ? 1.0 : 0.0);
        }
    }
    return (twice / 2.0) / (p * n);
}

// Rank of item i: items scoring higher, plus equal-scoring items at or before
// i. Precision at each positive's rank, summed in rank order.
inline double brute_ap(const std::vector<double>& s, const std::vector<double>& y) {
    std::vector<std::pair<std::size_t, std::size_t>> at;  // (rank, hits)
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1.0) continue;
        std::size_t rank = 0, hits = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s[j] > s[i] || (s[j] == s[i] && j <= i)) {
                ++rank;
                hits += y[j] == 1.0;
            }
        }
        at.emplace_back(rank, hits);
    }
    std::sort(at.begin(), at.end());
    double total = 0.0;
    for (const auto& [rank, hits] : at) total += static_cast<double>(hits) / static_cast<double>(rank);
    return total / static_cast<double>(at.size());
}

// ---------------------------------------------------------------- gradients

struct SmallInstance {
    Graph graph;
    FeatureBundle bundle;
    FeatureInputs inputs;
    NormalizedAdjacency adj;
    ModelParams params;
    std::vector<Edge> pairs;
    std::vector<double> labels;
    SignalKind kind = SignalKind::Mixed;
    Propagation propagation = Propagation::Graph;
};

// Random graph on `n` nodes with both edges and non-edges, random features,
// random parameters, and every unordered pair as a training pair.
inline SmallInstance small_instance(std::uint64_t seed, std::size_t n = 6, std::size_t concepts = 4) {
    Rng rng(mix_seed(seed, 0x6c));
    SmallInstance s;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    std::vector<std::pair<NodeId, NodeId>> edges;
    while (edges.empty() || edges.size() == n * (n - 1) / 2) {
        edges.clear();
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (rng.bernoulli(0.5)) edges.emplace_back(i, j);
    }
    s.graph = Graph(names, edges);

    s.bundle.node_names = names;
    for (std::size_t c = 0; c < concepts; ++c) s.bundle.concepts.push_back("k" + std::to_string(c));
    s.bundle.counts = Matrix(n, concepts);
    for (double& v : s.bundle.counts.values()) v = static_cast<double>(rng.index(6));
    for (auto& f : s.bundle.framing) {
        f = Matrix(n, concepts);
        for (double& v : f.values()) v = rng.uniform(-1.0, 1.0);
    }
    s.inputs = prepare_inputs(s.bundle, seed % 2 == 1);

    const std::array<SignalKind, 3> kinds{SignalKind::Mixed, SignalKind::Agenda, SignalKind::Framing};
    s.kind = kinds[seed % 3];
    s.propagation = seed % 4 == 3 ? Propagation::Identity : Propagation::Graph;
    s.adj = s.propagation == Propagation::Identity ? NormalizedAdjacency::make_identity(n) : normalized_adjacency(s.graph);

    s.params = init_params({concepts, 5, 3}, mix_seed(seed, 1));
    // Larger weights than the default init so every path carries signal.
    for (double& v : s.params.w0.values()) v = rng.uniform(-1.0, 1.0);
    for (double& v : s.params.w1.values()) v = rng.uniform(-1.0, 1.0);
    for (double& v : s.params.mixture.beta_logits.values()) v = rng.uniform(-1.5, 1.5);
    for (double& v : s.params.mixture.gamma_logits) v = rng.uniform(-1.5, 1.5);

    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) {
            s.pairs.emplace_back(i, j);
            s.labels.push_back(s.graph.has_edge(i, j) ? 1.0 : 0.0);
        }
    return s;
}

inline double instance_loss(const SmallInstance& s, const ModelParams& p) {
    const ForwardCache c = forward(s.adj, s.inputs, p, s.kind, s.propagation);
    return bce_loss(decode_pairs(c.z, s.pairs), s.labels);
}

struct GradientCheck {
    // ||analytic - numeric|| / max(||analytic||, ||numeric||) per parameter block.
    std::array<double, 4> relative_error{};  // w0, w1, beta logits, gamma logits
    double worst() const { return *std::max_element(relative_error.begin(), relative_error.end()); }
};

inline GradientCheck check_gradients(const SmallInstance& s, double h = 1e-6) {
    const ForwardCache cache = forward(s.adj, s.inputs, s.params, s.kind, s.propagation);
    const Gradients g = backward(cache, s.pairs, s.labels, s.adj, s.inputs, s.params, s.kind);

    auto block = [&](auto&& slot, const std::vector<double>& analytic) {
        ModelParams p = s.params;
        std::span<double> values = slot(p);
        double diff = 0.0, na = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double keep = values[i];
            values[i] = keep + h;
            const double up = instance_loss(s, p);
            values[i] = keep - h;
            const double down = instance_loss(s, p);
            values[i] = keep;
            const double numeric = (up - down) / (2.0 * h);
            diff += (analytic[i] - numeric) * (analytic[i] - numeric);
            na += analytic[i] * analytic[i];
            nn += numeric * numeric;
        }
        const double scale = std::max(std::sqrt(na), std::sqrt(nn));
        return scale < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / scale;
    };
    auto vec = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };

    GradientCheck out;
    out.relative_error[0] = block([](ModelParams& p) { return p.w0.values(); }, vec(g.w0.values()));
    out.relative_error[1] = block([](ModelParams& p) { return p.w1.values(); }, vec(g.w1.values()));
    out.relative_error[2] = block([](ModelParams& p) { return p.mixture.beta_logits.values(); }, vec(g.beta_logits.values()));
    out.relative_error[3] = block([](ModelParams& p) { return std::span<double>(p.mixture.gamma_logits); }, g.gamma_logits);
    return out;
}

// ---------------------------------------------------------------- benchmark

inline constexpr std::array<double, 3> kSplitRatios{0.6, 0.2, 0.2};

// Planted benchmark: both signal kinds present, each individually weak, so
// the graph carries most of the link signal.
inline PlantedConfig benchmark_planted(std::uint64_t seed) {
    PlantedConfig c;
    c.seed = seed;
    return c;
}

// Recovery regime: the same SBM with strong per-concept signals.
inline PlantedConfig recovery_planted(std::uint64_t seed) {
    PlantedConfig c;
    c.framing_shift = 0.45;
    c.agenda_lift = 3.0;
    c.seed = seed;
    return c;
}

inline TrainConfig benchmark_train(Variant v, std::uint64_t seed) {
    TrainConfig t;
    t.variant = v;
    t.seed = seed;
    t.standardize = true;
    return t;
}

inline SweepGrid benchmark_grid(std::size_t max_epochs) {
    SweepGrid g;
    g.max_epochs = max_epochs;
    g.lambdas = {1e-3, 3e-3, 1e-2, 3e-2};
    return g;
}

// AUC of the scorer that knows the planted blocks: 1 for a same-block pair,
// 0 otherwise. No model sees more of the block structure than this.
inline double block_oracle_auc(const PlantedTruth& t, const std::vector<Edge>& pos, const std::vector<Edge>& neg) {
    std::vector<double> s, y;
    for (const auto& e : pos) {
        s.push_back(t.block[e.u] == t.block[e.v] ? 1.0 : 0.0);
        y.push_back(1.0);
    }
    for (const auto& e : neg) {
        s.push_back(t.block[e.u] == t.block[e.v] ? 1.0 : 0.0);
        y.push_back(0.0);
    }
    return brute_auc(s, y);
}

// ---------------------------------------------------------------- files

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sgae_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace sgae::testing
