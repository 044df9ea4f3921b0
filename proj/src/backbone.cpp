#include "sgae/backbone.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "sgae/error.hpp"
#include "sgae/rng.hpp"

namespace sgae {

using nlohmann::json;

double WeightedNetwork::total_weight() const {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.rows(); ++i)
        for (std::size_t j = i + 1; j < weights.cols(); ++j) total += weights(i, j);
    return total;
}

double WeightedNetwork::strength(std::size_t i) const {
    double s = 0.0;
    for (double x : weights.row(i)) s += x;
    return s;
}

void WeightedNetwork::validate() const {
    const std::size_t n = node_names.size();
    if (weights.rows() != n || weights.cols() != n)
        throw Error(ErrorKind::Format, "weighted network: weight matrix must be node_count x node_count");
    for (std::size_t i = 0; i < n; ++i) {
        if (weights(i, i) != 0.0) throw Error(ErrorKind::Format, "weighted network: non-zero diagonal at " + node_names[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!(weights(i, j) >= 0.0) || !std::isfinite(weights(i, j)))
                throw Error(ErrorKind::Format, "weighted network: invalid weight between " + node_names[i] + " and " + node_names[j]);
            if (weights(i, j) != weights(j, i))
                throw Error(ErrorKind::Format, "weighted network: asymmetric weight between " + node_names[i] + " and " + node_names[j]);
        }
    }
}

WeightedNetwork cooccurrence_weights(std::span<const ActivityRecord> activity, double min_comments) {
    std::map<std::string, std::size_t> node_ids;
    for (const auto& r : activity) {
        if (!(r.comments >= 0.0)) throw Error(ErrorKind::InvalidArgument, "activity: negative comment count for " + r.user);
        node_ids.emplace(r.node, 0);
    }
    WeightedNetwork w;
    for (auto& [name, id] : node_ids) {
        id = w.node_names.size();
        w.node_names.push_back(name);
    }
    const std::size_t n = w.node_names.size();
    w.weights = Matrix(n, n);

    // Per user: total comments per node, then qualifying nodes.
    std::map<std::string, std::map<std::size_t, double>> per_user;
    for (const auto& r : activity) per_user[r.user][node_ids.at(r.node)] += r.comments;
    for (const auto& [user, counts] : per_user) {
        std::vector<std::size_t> q;
        for (const auto& [node, c] : counts)
            if (c >= min_comments) q.push_back(node);
        for (std::size_t a = 0; a < q.size(); ++a)
            for (std::size_t b = a + 1; b < q.size(); ++b) {
                w.weights(q[a], q[b]) += 1.0;
                w.weights(q[b], q[a]) += 1.0;
            }
    }
    return w;
}

Graph noise_corrected_filter(const WeightedNetwork& w, double delta) {
    if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise-corrected filter: delta must be >= 0");
    const std::size_t n = w.node_count();
    std::vector<std::pair<NodeId, NodeId>> kept;
    const double total = w.total_weight();
    if (total > 0.0) {
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) s[i] = w.strength(i);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double wij = w.weights(i, j);
                if (wij <= 0.0) continue;
                const double p = (s[i] / total) * (s[j] / total);
                const double mu = total * p;
                const double sigma = std::sqrt(std::max(0.0, total * p * (1.0 - p)));
                if (wij > mu + delta * sigma) kept.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
            }
    }
    return Graph(w.node_names, kept);
}

KneeResult kneedle(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) throw Error(ErrorKind::InvalidArgument, "kneedle: x and y must be non-empty and of equal length");
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const double xr = *xmax - *xmin;
    const double yr = *ymax - *ymin;
    if (xr <= 0.0 || yr <= 0.0) return {0, true};
    KneeResult best{0, false};
    double best_diff = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = (y[i] - *ymin) / yr - (x[i] - *xmin) / xr;
        if (d > best_diff) {
            best_diff = d;
            best.index = i;
        }
    }
    if (best_diff <= 1e-12) return {0, true};
    return best;
}

GraphStats graph_stats(const Graph& g) {
    GraphStats st;
    st.nodes = g.node_count();
    st.edges = g.edge_count();
    if (st.nodes == 0) return st;
    const double n = static_cast<double>(st.nodes);
    const double m = static_cast<double>(st.edges);
    st.mean_degree = 2.0 * m / n;
    st.density = st.nodes > 1 ? 2.0 * m / (n * (n - 1.0)) : 0.0;

    std::vector<std::size_t> comp(st.nodes, SIZE_MAX);
    std::vector<std::size_t> sizes;
    for (std::size_t s = 0; s < st.nodes; ++s) {
        if (comp[s] != SIZE_MAX) continue;
        const std::size_t id = sizes.size();
        sizes.push_back(0);
        std::vector<NodeId> stack{static_cast<NodeId>(s)};
        comp[s] = id;
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            ++sizes[id];
            for (NodeId u : g.neighbors(v))
                if (comp[u] == SIZE_MAX) {
                    comp[u] = id;
                    stack.push_back(u);
                }
        }
    }
    const std::size_t largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    st.largest_component = sizes[largest];
    if (st.largest_component < 2) return st;

    double total = 0.0;
    std::vector<std::size_t> dist(st.nodes);
    for (std::size_t s = 0; s < st.nodes; ++s) {
        if (comp[s] != largest) continue;
        std::fill(dist.begin(), dist.end(), SIZE_MAX);
        std::queue<NodeId> q;
        q.push(static_cast<NodeId>(s));
        dist[s] = 0;
        while (!q.empty()) {
            const NodeId v = q.front();
            q.pop();
            for (NodeId u : g.neighbors(v))
                if (dist[u] == SIZE_MAX) {
                    dist[u] = dist[v] + 1;
                    total += static_cast<double>(dist[u]);
                    q.push(u);
                }
        }
    }
    const double k = static_cast<double>(st.largest_component);
    st.mean_shortest_path = total / (k * (k - 1.0));
    return st;
}

namespace {

Graph drop_isolated(const Graph& g) {
    std::vector<NodeId> remap(g.node_count(), 0);
    std::vector<std::string> names;
    for (std::size_t v = 0; v < g.node_count(); ++v)
        if (g.degree(static_cast<NodeId>(v)) > 0) {
            remap[v] = static_cast<NodeId>(names.size());
            names.push_back(g.node_names()[v]);
        }
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (const auto& e : g.edges()) pairs.emplace_back(remap[e.u], remap[e.v]);
    return Graph(std::move(names), pairs);
}

std::size_t non_isolated(const Graph& g) {
    std::size_t c = 0;
    for (std::size_t v = 0; v < g.node_count(); ++v) c += g.degree(static_cast<NodeId>(v)) > 0;
    return c;
}

}  // namespace

std::vector<double> default_deltas() {
    std::vector<double> d;
    for (int i = 0; i <= 50; ++i) d.push_back(i / 10.0);
    return d;
}

BackboneReport backbone(const WeightedNetwork& w, std::span<const double> deltas) {
    if (deltas.size() < 4) throw Error(ErrorKind::InvalidArgument, "backbone: need at least 4 candidate deltas");
    if (!std::is_sorted(deltas.begin(), deltas.end()) ||
        std::adjacent_find(deltas.begin(), deltas.end()) != deltas.end())
        throw Error(ErrorKind::InvalidArgument, "backbone: deltas must be strictly ascending");
    w.validate();

    std::size_t positive = 0;
    for (std::size_t i = 0; i < w.node_count(); ++i)
        for (std::size_t j = i + 1; j < w.node_count(); ++j) positive += w.weights(i, j) > 0.0;
    const double n = static_cast<double>(std::max<std::size_t>(w.node_count(), 1));

    BackboneReport r;
    std::vector<double> xs, ys;
    std::vector<Graph> graphs;
    for (double d : deltas) {
        Graph g = noise_corrected_filter(w, d);
        KneePoint p;
        p.delta = d;
        p.edge_fraction = positive ? static_cast<double>(g.edge_count()) / static_cast<double>(positive) : 0.0;
        p.node_fraction = static_cast<double>(non_isolated(g)) / n;
        xs.push_back(p.edge_fraction);
        ys.push_back(p.node_fraction);
        r.knee_curve.push_back(p);
        graphs.push_back(std::move(g));
    }
    const KneeResult knee = kneedle(xs, ys);
    r.delta_used = deltas[knee.index];
    r.knee_degenerate = knee.degenerate;
    r.graph = drop_isolated(graphs[knee.index]);
    r.stats = graph_stats(r.graph);
    return r;
}

double modularity(const Graph& g, std::span<const std::size_t> partition) {
    if (partition.size() != g.node_count())
        throw Error(ErrorKind::InvalidArgument, "modularity: partition size does not match node count");
    const double m = static_cast<double>(g.edge_count());
    if (m == 0.0) return 0.0;
    std::unordered_map<std::size_t, std::pair<double, double>> comm;  // e_c, d_c
    for (const auto& e : g.edges())
        if (partition[e.u] == partition[e.v]) comm[partition[e.u]].first += 1.0;
    for (std::size_t v = 0; v < g.node_count(); ++v)
        comm[partition[v]].second += static_cast<double>(g.degree(static_cast<NodeId>(v)));
    // Sum in community-id order so the result does not depend on hash layout.
    std::vector<std::pair<std::size_t, std::pair<double, double>>> sorted(comm.begin(), comm.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double q = 0.0;
    for (const auto& [id, ed] : sorted) {
        const double frac = ed.second / (2.0 * m);
        q += ed.first / m - frac * frac;
    }
    return q;
}

namespace {

// Weighted multigraph level used between Louvain aggregations. Self-loop
// weight counts once toward internal weight and twice toward strength.
struct Level {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self;
    std::vector<double> strength;
    double two_m = 0.0;
};

Level level_from_graph(const Graph& g) {
    Level l;
    const std::size_t n = g.node_count();
    l.adj.resize(n);
    l.self.assign(n, 0.0);
    l.strength.assign(n, 0.0);
    for (const auto& e : g.edges()) {
        l.adj[e.u].emplace_back(e.v, 1.0);
        l.adj[e.v].emplace_back(e.u, 1.0);
        l.strength[e.u] += 1.0;
        l.strength[e.v] += 1.0;
    }
    l.two_m = 2.0 * static_cast<double>(g.edge_count());
    return l;
}

// One round of local moves; returns community per level node, renumbered
// densely in first-seen order, and whether anything moved.
std::pair<std::vector<std::size_t>, bool> local_moves(const Level& l, Rng& rng) {
    const std::size_t n = l.adj.size();
    std::vector<std::size_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot = l.strength;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    bool any = false;
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t i : order) {
            const std::size_t ci = comm[i];
            const double ki = l.strength[i];
            touched.clear();
            for (const auto& [j, wij] : l.adj[i]) {
                if (j == i) continue;
                if (link[comm[j]] == 0.0) touched.push_back(comm[j]);
                link[comm[j]] += wij;
            }
            tot[ci] -= ki;
            std::size_t best = ci;
            double best_gain = link[ci] - tot[ci] * ki / l.two_m;
            for (std::size_t c : touched) {
                const double gain = link[c] - tot[c] * ki / l.two_m;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            tot[best] += ki;
            comm[i] = best;
            for (std::size_t c : touched) link[c] = 0.0;
            link[ci] = 0.0;
            if (best != ci) improved = any = true;
        }
    }
    std::vector<std::size_t> remap(n, SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (remap[comm[i]] == SIZE_MAX) remap[comm[i]] = next++;
        comm[i] = remap[comm[i]];
    }
    return {comm, any};
}

Level aggregate(const Level& l, const std::vector<std::size_t>& comm) {
    const std::size_t k = *std::max_element(comm.begin(), comm.end()) + 1;
    Level out;
    out.adj.resize(k);
    out.self.assign(k, 0.0);
    out.strength.assign(k, 0.0);
    out.two_m = l.two_m;
    std::vector<std::map<std::size_t, double>> links(k);
    for (std::size_t i = 0; i < l.adj.size(); ++i) {
        out.self[comm[i]] += l.self[i];
        out.strength[comm[i]] += l.strength[i];
        for (const auto& [j, w] : l.adj[i]) {
            if (comm[i] == comm[j])
                out.self[comm[i]] += 0.5 * w;  // each internal edge is seen from both ends
            else
                links[comm[i]][comm[j]] += w;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (const auto& [d, w] : links[c]) out.adj[c].emplace_back(d, w);
    return out;
}

}  // namespace

ModularityResult louvain_modularity(const Graph& g, std::uint64_t seed) {
    ModularityResult r;
    const std::size_t n = g.node_count();
    r.partition.resize(n);
    std::iota(r.partition.begin(), r.partition.end(), 0);
    if (g.edge_count() == 0) return r;

    Rng rng(mix_seed(seed, 0x10a));
    Level level = level_from_graph(g);
    while (true) {
        auto [comm, moved] = local_moves(level, rng);
        if (!moved) break;
        for (auto& c : r.partition) c = comm[c];
        level = aggregate(level, comm);
        if (level.adj.size() == 1) break;
    }
    std::vector<std::size_t> remap(n, SIZE_MAX);
    std::size_t next = 0;
    for (auto& c : r.partition) {
        if (remap[c] == SIZE_MAX) remap[c] = next++;
        c = remap[c];
    }
    r.q = modularity(g, r.partition);
    return r;
}

std::size_t double_edge_swap(std::vector<Edge>& edges, std::size_t attempts, std::uint64_t seed) {
    if (edges.size() < 2) return 0;
    EdgeSet present(edges.begin(), edges.end());
    Rng rng(seed);
    std::size_t accepted = 0;
    for (std::size_t t = 0; t < attempts; ++t) {
        const std::size_t i = rng.index(edges.size());
        const std::size_t j = rng.index(edges.size());
        if (i == j) continue;
        const NodeId a = edges[i].u, b = edges[i].v;
        NodeId c = edges[j].u, d = edges[j].v;
        if (rng.bernoulli(0.5)) std::swap(c, d);
        // (a, b), (c, d) -> (a, d), (c, b)
        if (a == d || c == b) continue;
        const Edge e1(a, d), e2(c, b);
        if (present.count(e1) || present.count(e2)) continue;
        present.erase(edges[i]);
        present.erase(edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
        ++accepted;
    }
    return accepted;
}

ModularityResult degree_preserving_null(const Graph& g, std::size_t n_shuffles, std::uint64_t seed, std::size_t jobs) {
    if (n_shuffles < 10) throw Error(ErrorKind::InvalidArgument, "degree-preserving null: need at least 10 shuffles");
    ModularityResult r = louvain_modularity(g, seed);
    r.null_qs.assign(n_shuffles, 0.0);
    std::vector<std::uint8_t> preserved(n_shuffles, 1);
    const std::size_t attempts = 10 * g.edge_count();

    auto run = [&](std::size_t s) {
        std::vector<Edge> edges = g.edges();
        double_edge_swap(edges, attempts, mix_seed(seed, 0x5000 + s));
        const Graph shuffled = g.with_edges(edges);
        for (std::size_t v = 0; v < g.node_count(); ++v)
            if (shuffled.degree(static_cast<NodeId>(v)) != g.degree(static_cast<NodeId>(v))) preserved[s] = 0;
        r.null_qs[s] = louvain_modularity(shuffled, mix_seed(seed, 0x6000 + s)).q;
    };
    const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, n_shuffles);
    if (n_threads == 1) {
        for (std::size_t s = 0; s < n_shuffles; ++s) run(s);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t s = t; s < n_shuffles; s += n_threads) run(s);
            });
    }

    r.degrees_preserved = std::all_of(preserved.begin(), preserved.end(), [](std::uint8_t p) { return p != 0; });
    double sum = 0.0;
    for (double q : r.null_qs) sum += q;
    r.null_mean = sum / static_cast<double>(n_shuffles);
    double ss = 0.0;
    for (double q : r.null_qs) ss += (q - r.null_mean) * (q - r.null_mean);
    r.null_std = std::sqrt(ss / static_cast<double>(n_shuffles - 1));
    r.z_defined = r.null_std > 1e-12;
    r.z_score = r.z_defined ? (r.q - r.null_mean) / r.null_std : 0.0;
    return r;
}

namespace {

std::vector<std::vector<std::string>> split_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() == 1 && fields[0].empty()) continue;
        rows.push_back(std::move(fields));
    }
    return rows;
}

bool parse_number(const std::string& s, double& out) {
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

WeightedNetwork parse_weighted_tsv(const std::string& text) {
    const auto rows = split_rows(text);
    std::unordered_map<std::string, std::size_t> ids;
    WeightedNetwork w;
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != 3) throw Error(ErrorKind::Format, "weighted TSV line " + std::to_string(r + 1) + ": expected 3 fields");
        double x = 0.0;
        if (!parse_number(f[2], x)) {
            if (r == 0) continue;
            throw Error(ErrorKind::Format, "weighted TSV line " + std::to_string(r + 1) + ": bad weight '" + f[2] + "'");
        }
        if (!(x >= 0.0) || !std::isfinite(x))
            throw Error(ErrorKind::Format, "weighted TSV line " + std::to_string(r + 1) + ": weight must be finite and >= 0");
        if (f[0] == f[1]) throw Error(ErrorKind::Format, "weighted TSV line " + std::to_string(r + 1) + ": self-loop");
        std::size_t ij[2];
        for (int k = 0; k < 2; ++k) {
            auto [it, fresh] = ids.emplace(f[k], w.node_names.size());
            if (fresh) w.node_names.push_back(f[k]);
            ij[k] = it->second;
        }
        entries.emplace_back(ij[0], ij[1], x);
    }
    const std::size_t n = w.node_names.size();
    w.weights = Matrix(n, n);
    for (const auto& [i, j, x] : entries) {
        w.weights(i, j) += x;
        w.weights(j, i) += x;
    }
    return w;
}

std::vector<ActivityRecord> parse_activity_tsv(const std::string& text) {
    const auto rows = split_rows(text);
    std::vector<ActivityRecord> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != 3) throw Error(ErrorKind::Format, "activity TSV line " + std::to_string(r + 1) + ": expected 3 fields");
        double x = 0.0;
        if (!parse_number(f[2], x)) {
            if (r == 0) continue;
            throw Error(ErrorKind::Format, "activity TSV line " + std::to_string(r + 1) + ": bad count '" + f[2] + "'");
        }
        if (!(x >= 0.0)) throw Error(ErrorKind::Format, "activity TSV line " + std::to_string(r + 1) + ": negative count");
        out.push_back({f[0], f[1], x});
    }
    return out;
}

std::string backbone_report_to_json(const BackboneReport& r) {
    json curve = json::array();
    for (const auto& p : r.knee_curve)
        curve.push_back({{"delta", p.delta}, {"edge_fraction", p.edge_fraction}, {"node_fraction", p.node_fraction}});
    json doc = {{"delta_used", r.delta_used},
                {"knee_degenerate", r.knee_degenerate},
                {"knee_curve", curve},
                {"stats",
                 {{"nodes", r.stats.nodes},
                  {"edges", r.stats.edges},
                  {"mean_degree", r.stats.mean_degree},
                  {"density", r.stats.density},
                  {"largest_component", r.stats.largest_component},
                  {"mean_shortest_path", r.stats.mean_shortest_path}}}};
    return doc.dump(2) + "\n";
}

std::string modularity_to_json(const ModularityResult& r, const Graph& g) {
    json part = json::object();
    for (std::size_t v = 0; v < g.node_count(); ++v) part[g.node_names()[v]] = r.partition[v];
    json doc = {{"q", r.q},
                {"communities", r.partition.empty() ? 0 : *std::max_element(r.partition.begin(), r.partition.end()) + 1},
                {"partition", part},
                {"null_mean", r.null_mean},
                {"null_std", r.null_std},
                {"z_score", r.z_defined ? json(r.z_score) : json(nullptr)},
                {"z_defined", r.z_defined},
                {"null_qs", r.null_qs},
                {"degrees_preserved", r.degrees_preserved}};
    return doc.dump(2) + "\n";
}

}  // namespace sgae
