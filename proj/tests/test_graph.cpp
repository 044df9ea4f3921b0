#include <doctest.h>

#include <cmath>
#include <set>

#include "sgae/error.hpp"
#include "sgae/graph.hpp"
#include "sgae/matrix.hpp"
#include "support.hpp"

using namespace sgae;

namespace {

Graph path4() {
    std::vector<std::pair<std::string, std::string>> pairs{{"a", "b"}, {"b", "c"}, {"c", "d"}};
    return build_graph({"a", "b", "c", "d"}, pairs);
}

Graph ring(std::size_t n) {
    std::vector<std::string> names;
    std::vector<std::pair<NodeId, NodeId>> e;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back("r" + std::to_string(i));
        e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
    }
    return Graph(names, e);
}

}  // namespace

TEST_CASE("edges are canonical and deduplicated") {
    std::vector<std::pair<NodeId, NodeId>> e{{1, 0}, {0, 1}, {2, 1}};
    Graph g({"x", "y", "z"}, e);
    CHECK(g.edge_count() == 2);
    CHECK(g.edges()[0] == Edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(g.has_edge(2, 1));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK(g.degree(1) == 2);
}

TEST_CASE("build_graph names unknown nodes and self-loops") {
    std::vector<std::pair<std::string, std::string>> unknown{{"a", "q"}};
    try {
        build_graph({"a", "b"}, unknown);
        FAIL("expected NotFound");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotFound);
        CHECK(std::string(e.what()).find("q") != std::string::npos);
    }
    std::vector<std::pair<std::string, std::string>> loop{{"a", "a"}};
    try {
        build_graph({"a", "b"}, loop);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("sparse adjacency path matches the dense one") {
    const std::size_t n = Graph::kDenseLimit + 10;
    const Graph g = ring(n);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(static_cast<NodeId>(n - 1), 0));
    CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("normalized adjacency of a path") {
    const auto m = normalized_adjacency(path4()).matrix;
    // Degrees with self-loops: 2, 3, 3, 2.
    CHECK(m(0, 0) == doctest::Approx(0.5));
    CHECK(m(1, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(m(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
    CHECK(m(1, 0) == m(0, 1));
    CHECK(m(0, 2) == 0.0);
    CHECK(m(1, 2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("isolated node keeps a unit self-weight") {
    Graph g({"a", "b", "c"}, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
    const auto m = normalized_adjacency(g).matrix;
    CHECK(m(2, 2) == 1.0);
}

TEST_CASE("split partitions edges with frozen negatives") {
    const auto d = generate_planted(testing::benchmark_planted(3));
    const EdgeSplit s = split_edges(d.graph, {0.6, 0.2, 0.2}, 5);
    const std::size_t m = d.graph.edge_count();
    CHECK(s.dev_edges.size() == static_cast<std::size_t>(std::floor(0.2 * m + 1e-9)));
    CHECK(s.test_edges.size() == s.dev_edges.size());
    CHECK(s.train_edges.size() + s.dev_edges.size() + s.test_edges.size() == m);
    CHECK(s.dev_negatives.size() == s.dev_edges.size());
    CHECK(s.test_negatives.size() == s.test_edges.size());
    CHECK_NOTHROW(validate_split(d.graph, s));
    std::set<Edge> neg(s.dev_negatives.begin(), s.dev_negatives.end());
    neg.insert(s.test_negatives.begin(), s.test_negatives.end());
    CHECK(neg.size() == s.dev_negatives.size() + s.test_negatives.size());

    const EdgeSplit again = split_edges(d.graph, {0.6, 0.2, 0.2}, 5);
    CHECK(again.dev_edges == s.dev_edges);
    CHECK(again.test_negatives == s.test_negatives);
    const EdgeSplit other = split_edges(d.graph, {0.6, 0.2, 0.2}, 6);
    CHECK(other.dev_edges != s.dev_edges);
}

TEST_CASE("split rejects bad ratios and tiny graphs") {
    CHECK_THROWS_AS(split_edges(path4(), {0.6, 0.2, 0.2}, 0), Error);
    const Graph g = ring(20);
    CHECK_THROWS_AS(split_edges(g, {0.5, 0.2, 0.2}, 0), Error);
    CHECK_THROWS_AS(split_edges(g, {1.0, 0.0, 0.0}, 0), Error);
}

TEST_CASE("negative sampling reports the shortfall") {
    const Graph g = path4();  // 6 pairs, 3 edges
    CHECK(sample_negatives(g, 3, 1).size() == 3);
    try {
        sample_negatives(g, 4, 1);
        FAIL("expected Infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
        CHECK(std::string(e.what()).find("shortfall 1") != std::string::npos);
    }
    EdgeSet exclude{Edge(0, 2)};
    const auto neg = sample_negatives(g, 2, 1, exclude);
    for (const auto& e : neg) {
        CHECK_FALSE(g.has_edge(e.u, e.v));
        CHECK(e != Edge(0, 2));
    }
}

TEST_CASE("graph and split JSON round trip") {
    const auto d = generate_planted(testing::benchmark_planted(1));
    const Graph g = graph_from_json(graph_to_json(d.graph));
    CHECK(g.node_names() == d.graph.node_names());
    CHECK(g.edges() == d.graph.edges());
    const EdgeSplit s = split_edges(g, {0.6, 0.2, 0.2}, 2);
    const EdgeSplit r = split_from_json(split_to_json(s), g.node_count());
    CHECK(r.train_edges == s.train_edges);
    CHECK(r.dev_negatives == s.dev_negatives);
    CHECK(r.seed == 2);
}

TEST_CASE("malformed graph documents are Format errors") {
    for (const char* text : {"[]", "{\"nodes\": [\"a\"]}", "{\"nodes\": [\"a\", \"a\"], \"edges\": []}",
                             "{\"nodes\": [\"a\", \"b\"], \"edges\": [[0, 0]]}",
                             "{\"nodes\": [\"a\", \"b\"], \"edges\": [[0, 5]]}", "not json"}) {
        CAPTURE(text);
        try {
            graph_from_json(text);
            FAIL("expected Format");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Format);
        }
    }
}

TEST_CASE("validate_split catches tampering") {
    const Graph g = ring(20);
    EdgeSplit s = split_edges(g, {0.6, 0.2, 0.2}, 0);
    EdgeSplit dup = s;
    dup.train_edges.push_back(dup.dev_edges.front());
    CHECK_THROWS_AS(validate_split(g, dup), Error);
    EdgeSplit bad_neg = s;
    bad_neg.dev_negatives.front() = s.train_edges.front();
    CHECK_THROWS_AS(validate_split(g, bad_neg), Error);
}

TEST_CASE("matrix products") {
    Matrix a(2, 3), b(3, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        a.values()[i] = static_cast<double>(i + 1);
        b.values()[i] = static_cast<double>(6 - i);
    }
    const Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 1 * 6 + 2 * 4 + 3 * 2);
    CHECK(c(1, 1) == 4 * 5 + 5 * 3 + 6 * 1);
    CHECK(matmul_tn(transpose(a), b) == c);
    CHECK(matmul_nt(a, transpose(b)) == c);
    CHECK(frobenius_norm(Matrix::identity(4)) == 2.0);
}
