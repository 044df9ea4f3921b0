#include <doctest.h>

#include "sgae/error.hpp"
#include "sgae/metrics.hpp"
#include "sgae/rng.hpp"
#include "support.hpp"

using namespace sgae;

TEST_CASE("AUC of hand-worked cases") {
    CHECK(auc(std::vector<double>{0.9, 0.1}, std::vector<double>{1, 0}) == 1.0);
    CHECK(auc(std::vector<double>{0.1, 0.9}, std::vector<double>{1, 0}) == 0.0);
    CHECK(auc(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}) == 0.5);
    // Positives 0.8, 0.4; negatives 0.6, 0.4: wins 2 + 0 + tie 0.5 = 2.5 of 4.
    CHECK(auc(std::vector<double>{0.8, 0.4, 0.6, 0.4}, std::vector<double>{1, 1, 0, 0}) == 0.625);
}

TEST_CASE("AP of hand-worked cases") {
    // Ranking: + - + : (1/1 + 2/3) / 2
    CHECK(average_precision(std::vector<double>{0.9, 0.5, 0.7}, std::vector<double>{1, 1, 0}) ==
          doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    // Ties keep input order: the negative listed first ranks first.
    CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 1}) == 0.5);
    CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}) == 1.0);
}

TEST_CASE("metrics equal brute-force references exactly") {
    Rng rng(3);
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = 2 + rng.index(120);
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = k % 3 == 0 ? static_cast<double>(rng.index(3)) : rng.uniform();
            y[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
        }
        y[n - 1] = 1.0;
        y[0] = 0.0;
        CHECK(auc(s, y) == testing::brute_auc(s, y));
        CHECK(average_precision(s, y) == testing::brute_ap(s, y));
    }
}

TEST_CASE("metrics need both classes and binary labels") {
    CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1}), Error);
    CHECK_THROWS_AS(average_precision(std::vector<double>{0.1, 0.2}, std::vector<double>{0, 0}), Error);
    CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 0.5}), Error);
    CHECK_THROWS_AS(auc(std::vector<double>{0.1}, std::vector<double>{1, 0}), Error);
}

TEST_CASE("evaluate_pairs scores embeddings") {
    Matrix z(4, 1);
    z(0, 0) = 2;
    z(1, 0) = 2;
    z(2, 0) = -2;
    z(3, 0) = 0;
    const std::vector<Edge> pos{Edge(0, 1)}, neg{Edge(0, 2), Edge(1, 3)};
    const Metrics m = evaluate_pairs(z, pos, neg);
    CHECK(m.auc == 1.0);
    CHECK(m.ap == 1.0);
    CHECK(m.n_pos == 1);
    CHECK(m.n_neg == 2);
    CHECK_THROWS_AS(evaluate_pairs(z, pos, {}), Error);
}
