#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sgae/matrix.hpp"

namespace sgae {

using NodeId = std::uint32_t;

// Unordered node pair, stored with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    Edge() = default;
    Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

    auto operator<=>(const Edge&) const = default;
};

struct EdgeHash {
    std::size_t operator()(const Edge& e) const noexcept {
        return std::hash<std::uint64_t>{}((std::uint64_t{e.u} << 32) | e.v);
    }
};

using EdgeSet = std::unordered_set<Edge, EdgeHash>;

// Simple undirected graph: no self-loops, no duplicate edges, dense ids.
// Adjacency tests use a dense bitmap up to kDenseLimit nodes and binary search
// over sorted neighbor lists beyond.
class Graph {
public:
    static constexpr std::size_t kDenseLimit = 2048;

    Graph() = default;
    // Index-based constructor; throws on self-loops or out-of-range ids.
    // Duplicate pairs (in either orientation) collapse to one edge.
    Graph(std::vector<std::string> node_names, std::span<const std::pair<NodeId, NodeId>> pairs);

    std::size_t node_count() const noexcept { return names_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<std::string>& node_names() const noexcept { return names_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
    std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
    bool has_edge(NodeId a, NodeId b) const;

    // Graph on the same nodes with a different edge list.
    Graph with_edges(std::span<const Edge> edges) const;

private:
    void index();

    std::vector<std::string> names_;
    std::vector<Edge> edges_;  // sorted
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::uint8_t> dense_;
};

// Builds a graph from named endpoints. Throws NotFound for an unknown name and
// InvalidArgument for a self-loop, naming the offending pair.
Graph build_graph(std::vector<std::string> node_names,
                  std::span<const std::pair<std::string, std::string>> edge_pairs);

// D~^{-1/2} (A + I) D~^{-1/2}, stored dense.
struct NormalizedAdjacency {
    Matrix matrix;
    std::size_t source_edges = 0;
    bool identity = false;  // propagation disabled (linear-layer baseline)

    std::size_t size() const noexcept { return matrix.rows(); }
    static NormalizedAdjacency make_identity(std::size_t n);
};

NormalizedAdjacency normalized_adjacency(const Graph& g);

struct EdgeSplit {
    std::vector<Edge> train_edges;
    std::vector<Edge> dev_edges;
    std::vector<Edge> test_edges;
    std::vector<Edge> dev_negatives;
    std::vector<Edge> test_negatives;
    std::uint64_t seed = 0;

    // dev/test positives and negatives; training never touches these pairs.
    EdgeSet held_out_pairs() const;
};

// Shuffled partition with floor-then-remainder sizing (remainder goes to
// train) plus frozen dev/test negatives matching the positive counts.
EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& ratios, std::uint64_t seed);

// `count` distinct non-edges, none a self-pair, none in `exclude`.
std::vector<Edge> sample_negatives(const Graph& g, std::size_t count, std::uint64_t seed,
                                   const EdgeSet& exclude = {});

// JSON graph file: {"nodes": [...], "edges": [[i, j], ...]}
Graph load_graph(const std::filesystem::path& path);
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

std::string split_to_json(const EdgeSplit& s);
EdgeSplit split_from_json(const std::string& text, std::size_t node_count);
EdgeSplit load_split(const std::filesystem::path& path, std::size_t node_count);

// Validates a split against its graph: disjoint positives covering E and
// negatives outside E. Throws Format on violation.
void validate_split(const Graph& g, const EdgeSplit& s);

}  // namespace sgae
