#include "sgae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "sgae/error.hpp"
#include "sgae/io.hpp"
#include "sgae/rng.hpp"

namespace sgae {

using nlohmann::json;

namespace {

std::string pair_text(NodeId a, NodeId b) { return "(" + std::to_string(a) + ", " + std::to_string(b) + ")"; }

}  // namespace

Graph::Graph(std::vector<std::string> node_names, std::span<const std::pair<NodeId, NodeId>> pairs)
    : names_(std::move(node_names)) {
    const auto n = names_.size();
    edges_.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (a >= n || b >= n) throw Error(ErrorKind::InvalidArgument, "edge endpoint out of range " + pair_text(a, b));
        if (a == b) throw Error(ErrorKind::InvalidArgument, "self-loop " + pair_text(a, b));
        edges_.emplace_back(a, b);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    index();
}

void Graph::index() {
    const auto n = names_.size();
    adjacency_.assign(n, {});
    for (const auto& e : edges_) {
        adjacency_[e.u].push_back(e.v);
        adjacency_[e.v].push_back(e.u);
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
    dense_.clear();
    if (n <= kDenseLimit) {
        dense_.assign(n * n, 0);
        for (const auto& e : edges_) {
            dense_[e.u * n + e.v] = 1;
            dense_[e.v * n + e.u] = 1;
        }
    }
}

bool Graph::has_edge(NodeId a, NodeId b) const {
    const auto n = names_.size();
    if (a >= n || b >= n || a == b) return false;
    if (!dense_.empty()) return dense_[std::size_t{a} * n + b] != 0;
    const auto& nb = adjacency_[a];
    return std::binary_search(nb.begin(), nb.end(), b);
}

Graph Graph::with_edges(std::span<const Edge> edges) const {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(edges.size());
    for (const auto& e : edges) pairs.emplace_back(e.u, e.v);
    return Graph(names_, pairs);
}

Graph build_graph(std::vector<std::string> node_names,
                  std::span<const std::pair<std::string, std::string>> edge_pairs) {
    std::unordered_map<std::string, NodeId> ids;
    for (std::size_t i = 0; i < node_names.size(); ++i) {
        if (!ids.emplace(node_names[i], static_cast<NodeId>(i)).second)
            throw Error(ErrorKind::InvalidArgument, "duplicate node name '" + node_names[i] + "'");
    }
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(edge_pairs.size());
    for (const auto& [a, b] : edge_pairs) {
        const auto ia = ids.find(a);
        const auto ib = ids.find(b);
        if (ia == ids.end() || ib == ids.end())
            throw Error(ErrorKind::NotFound, "unknown node in pair (" + a + ", " + b + ")");
        if (ia->second == ib->second) throw Error(ErrorKind::InvalidArgument, "self-loop (" + a + ", " + b + ")");
        pairs.emplace_back(ia->second, ib->second);
    }
    return Graph(std::move(node_names), pairs);
}

NormalizedAdjacency NormalizedAdjacency::make_identity(std::size_t n) {
    NormalizedAdjacency m;
    m.matrix = Matrix::identity(n);
    m.identity = true;
    return m;
}

NormalizedAdjacency normalized_adjacency(const Graph& g) {
    const auto n = g.node_count();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "normalized_adjacency: empty graph");
    std::vector<double> inv_sqrt(n);
    for (NodeId i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
    NormalizedAdjacency out;
    out.matrix = Matrix(n, n);
    out.source_edges = g.edge_count();
    for (NodeId i = 0; i < n; ++i) {
        out.matrix(i, i) = inv_sqrt[i] * inv_sqrt[i];
        for (NodeId j : g.neighbors(i)) out.matrix(i, j) = inv_sqrt[i] * inv_sqrt[j];
    }
    return out;
}

EdgeSet EdgeSplit::held_out_pairs() const {
    EdgeSet s;
    for (const auto* part : {&dev_edges, &test_edges, &dev_negatives, &test_negatives})
        s.insert(part->begin(), part->end());
    return s;
}

std::vector<Edge> sample_negatives(const Graph& g, std::size_t count, std::uint64_t seed, const EdgeSet& exclude) {
    if (count == 0) return {};
    const std::size_t n = g.node_count();
    const std::size_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
    std::size_t excluded_non_edges = 0;
    for (const auto& e : exclude)
        if (e.u != e.v && e.v < n && !g.has_edge(e.u, e.v)) ++excluded_non_edges;
    const std::size_t available = all_pairs - g.edge_count() - excluded_non_edges;
    if (available < count)
        throw Error(ErrorKind::Infeasible, "sample_negatives: requested " + std::to_string(count) +
                                               " non-edges but only " + std::to_string(available) +
                                               " are available (shortfall " + std::to_string(count - available) + ")");
    Rng rng(seed);
    std::vector<Edge> out;
    out.reserve(count);
    if (2 * count > available) {
        // Dense request: enumerate candidates and take a partial shuffle.
        std::vector<Edge> pool;
        pool.reserve(available);
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (!g.has_edge(i, j) && !exclude.contains(Edge(i, j))) pool.emplace_back(i, j);
        for (std::size_t k = 0; k < count; ++k) {
            const auto r = k + static_cast<std::size_t>(rng.index(pool.size() - k));
            std::swap(pool[k], pool[r]);
            out.push_back(pool[k]);
        }
        return out;
    }
    EdgeSet seen;
    while (out.size() < count) {
        const auto a = static_cast<NodeId>(rng.index(n));
        const auto b = static_cast<NodeId>(rng.index(n));
        if (a == b || g.has_edge(a, b)) continue;
        const Edge e(a, b);
        if (exclude.contains(e) || !seen.insert(e).second) continue;
        out.push_back(e);
    }
    return out;
}

EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& ratios, std::uint64_t seed) {
    for (double r : ratios)
        if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "split_edges: ratios must be positive");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidArgument, "split_edges: ratios must sum to 1");
    const std::size_t m = g.edge_count();
    if (m < 5) throw Error(ErrorKind::InvalidArgument, "split_edges: need at least 5 edges, graph has " + std::to_string(m));

    // Small epsilon so 0.2 * 10 floors to 2 rather than 1.
    const auto n_dev = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(m) + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(m) + 1e-9));

    EdgeSplit s;
    s.seed = seed;
    std::vector<Edge> edges = g.edges();
    Rng rng(mix_seed(seed, 1));
    rng.shuffle(edges);
    s.dev_edges.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_dev));
    s.test_edges.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_dev),
                        edges.begin() + static_cast<std::ptrdiff_t>(n_dev + n_test));
    s.train_edges.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_dev + n_test), edges.end());

    auto negatives = sample_negatives(g, n_dev + n_test, mix_seed(seed, 2));
    s.dev_negatives.assign(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(n_dev));
    s.test_negatives.assign(negatives.begin() + static_cast<std::ptrdiff_t>(n_dev), negatives.end());
    return s;
}

namespace {

json edges_to_json(const std::vector<Edge>& edges) {
    json arr = json::array();
    for (const auto& e : edges) arr.push_back({e.u, e.v});
    return arr;
}

std::vector<Edge> edges_from_json(const json& arr, std::size_t n, const std::string& what) {
    if (!arr.is_array()) throw Error(ErrorKind::Format, what + " must be an array");
    std::vector<Edge> out;
    out.reserve(arr.size());
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() || !p[1].is_number_unsigned())
            throw Error(ErrorKind::Format, what + ": each entry must be a pair of non-negative integers");
        const auto a = p[0].get<std::uint64_t>();
        const auto b = p[1].get<std::uint64_t>();
        if (a >= n || b >= n) throw Error(ErrorKind::Format, what + ": node index out of range");
        if (a == b) throw Error(ErrorKind::Format, what + ": self-pair " + pair_text(NodeId(a), NodeId(b)));
        out.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
    return out;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Format, what + ": " + e.what());
    }
}

}  // namespace

std::string graph_to_json(const Graph& g) {
    json doc;
    doc["nodes"] = g.node_names();
    doc["edges"] = edges_to_json(g.edges());
    return doc.dump() + "\n";
}

Graph graph_from_json(const std::string& text) {
    const json doc = parse_json(text, "graph");
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
        throw Error(ErrorKind::Format, "graph: expected object with 'nodes' and 'edges'");
    if (!doc["nodes"].is_array()) throw Error(ErrorKind::Format, "graph: 'nodes' must be an array");
    std::vector<std::string> names;
    for (const auto& n : doc["nodes"]) {
        if (!n.is_string()) throw Error(ErrorKind::Format, "graph: node names must be strings");
        names.push_back(n.get<std::string>());
    }
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorKind::Format, "graph: duplicate node names");
    const auto edges = edges_from_json(doc["edges"], names.size(), "graph edges");
    EdgeSet unique(edges.begin(), edges.end());
    if (unique.size() != edges.size()) throw Error(ErrorKind::Format, "graph: duplicate edges");
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (const auto& e : edges) pairs.emplace_back(e.u, e.v);
    return Graph(std::move(names), pairs);
}

Graph load_graph(const std::filesystem::path& path) { return graph_from_json(io::read_text(path)); }

std::string split_to_json(const EdgeSplit& s) {
    json doc;
    doc["train_edges"] = edges_to_json(s.train_edges);
    doc["dev_edges"] = edges_to_json(s.dev_edges);
    doc["test_edges"] = edges_to_json(s.test_edges);
    doc["dev_negatives"] = edges_to_json(s.dev_negatives);
    doc["test_negatives"] = edges_to_json(s.test_negatives);
    doc["seed"] = s.seed;
    return doc.dump() + "\n";
}

EdgeSplit split_from_json(const std::string& text, std::size_t node_count) {
    const json doc = parse_json(text, "split");
    if (!doc.is_object()) throw Error(ErrorKind::Format, "split: expected object");
    for (const char* key : {"train_edges", "dev_edges", "test_edges", "dev_negatives", "test_negatives", "seed"})
        if (!doc.contains(key)) throw Error(ErrorKind::Format, std::string("split: missing '") + key + "'");
    if (!doc["seed"].is_number_unsigned()) throw Error(ErrorKind::Format, "split: 'seed' must be a non-negative integer");
    EdgeSplit s;
    s.train_edges = edges_from_json(doc["train_edges"], node_count, "train_edges");
    s.dev_edges = edges_from_json(doc["dev_edges"], node_count, "dev_edges");
    s.test_edges = edges_from_json(doc["test_edges"], node_count, "test_edges");
    s.dev_negatives = edges_from_json(doc["dev_negatives"], node_count, "dev_negatives");
    s.test_negatives = edges_from_json(doc["test_negatives"], node_count, "test_negatives");
    s.seed = doc["seed"].get<std::uint64_t>();
    return s;
}

EdgeSplit load_split(const std::filesystem::path& path, std::size_t node_count) {
    return split_from_json(io::read_text(path), node_count);
}

void validate_split(const Graph& g, const EdgeSplit& s) {
    EdgeSet positives;
    for (const auto* part : {&s.train_edges, &s.dev_edges, &s.test_edges})
        for (const auto& e : *part) {
            if (!g.has_edge(e.u, e.v)) throw Error(ErrorKind::Format, "split: positive pair is not an edge");
            if (!positives.insert(e).second) throw Error(ErrorKind::Format, "split: edge assigned twice");
        }
    if (positives.size() != g.edge_count()) throw Error(ErrorKind::Format, "split: positives do not cover the edge set");
    if (s.dev_negatives.size() != s.dev_edges.size() || s.test_negatives.size() != s.test_edges.size())
        throw Error(ErrorKind::Format, "split: negative counts must match positive counts");
    EdgeSet negatives;
    for (const auto* part : {&s.dev_negatives, &s.test_negatives})
        for (const auto& e : *part) {
            if (g.has_edge(e.u, e.v)) throw Error(ErrorKind::Format, "split: negative pair is an edge");
            if (!negatives.insert(e).second) throw Error(ErrorKind::Format, "split: duplicate negative pair");
        }
}

}  // namespace sgae
