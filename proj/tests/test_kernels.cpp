#include <doctest.h>

#include <cmath>
#include <vector>

#include "sgae/kernels.hpp"
#include "sgae/rng.hpp"

using namespace sgae;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("scalar table is always present") {
    const auto& s = kernels::scalar();
    CHECK(s.name == "scalar");
    std::vector<double> x{1, 2, 3}, y{4, 5, 6};
    CHECK(s.dot(x.data(), y.data(), 3) == 32.0);
    CHECK(s.sum_squares(x.data(), 3) == 14.0);
    s.axpy(2.0, x.data(), y.data(), 3);
    CHECK(y == std::vector<double>{6, 9, 12});
    s.scale(0.5, y.data(), 3);
    CHECK(y == std::vector<double>{3, 4.5, 6});
}

TEST_CASE("relu and its mask") {
    const auto& s = kernels::scalar();
    std::vector<double> x{-1, 0, 2, -3, 4}, y(5);
    s.relu(x.data(), y.data(), 5);
    CHECK(y == std::vector<double>{0, 0, 2, 0, 4});
    std::vector<double> g{1, 1, 1, 1, 1};
    s.relu_mask(x.data(), g.data(), 5);
    CHECK(g == std::vector<double>{0, 0, 1, 0, 1});
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const auto* v = kernels::avx2();
    if (!v) {
        MESSAGE("AVX2 unavailable; equivalence not exercised");
        return;
    }
    const auto& s = kernels::scalar();
    Rng rng(4);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 33u, 100u, 1027u}) {
        CAPTURE(n);
        const auto x = random_vec(rng, n);
        const auto y = random_vec(rng, n);
        const double ds = s.dot(x.data(), y.data(), n), dv = v->dot(x.data(), y.data(), n);
        CHECK(std::abs(ds - dv) <= 1e-12 * (1.0 + std::abs(ds)) * static_cast<double>(n + 1));
        const double ss = s.sum_squares(x.data(), n), sv = v->sum_squares(x.data(), n);
        CHECK(std::abs(ss - sv) <= 1e-12 * (1.0 + ss) * static_cast<double>(n + 1));

        // Elementwise kernels are bit-identical.
        auto ya = y, yb = y;
        s.axpy(0.37, x.data(), ya.data(), n);
        v->axpy(0.37, x.data(), yb.data(), n);
        CHECK(ya == yb);
        auto xa = x, xb = x;
        s.scale(-1.7, xa.data(), n);
        v->scale(-1.7, xb.data(), n);
        CHECK(xa == xb);
        std::vector<double> ra(n), rb(n);
        s.relu(x.data(), ra.data(), n);
        v->relu(x.data(), rb.data(), n);
        CHECK(ra == rb);
        auto ga = y, gb = y;
        s.relu_mask(x.data(), ga.data(), n);
        v->relu_mask(x.data(), gb.data(), n);
        CHECK(ga == gb);
    }
}

TEST_CASE("AVX2 Adam step is bit-identical to the scalar step") {
    const auto* v = kernels::avx2();
    if (!v) return;
    const auto& s = kernels::scalar();
    Rng rng(9);
    for (std::size_t n : {1u, 5u, 16u, 101u}) {
        auto w = random_vec(rng, n), g = random_vec(rng, n);
        std::vector<double> m(n, 0.0), var(n, 0.0);
        auto w2 = w, m2 = m, v2 = var;
        std::vector<double> d1(n), d2(n);
        for (int step = 1; step <= 5; ++step) {
            const double bc1 = 1.0 - std::pow(0.9, step), bc2 = 1.0 - std::pow(0.999, step);
            s.adam_step(w.data(), m.data(), var.data(), g.data(), n, 1e-3, 0.9, 0.999, bc1, bc2, 1e-8, d1.data());
            v->adam_step(w2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9, 0.999, bc1, bc2, 1e-8, d2.data());
        }
        CHECK(w == w2);
        CHECK(m == m2);
        CHECK(var == v2);
        CHECK(d1 == d2);
    }
}

TEST_CASE("scalar Adam step matches the update rule") {
    const auto& s = kernels::scalar();
    std::vector<double> w{1.0}, m{0.0}, v{0.0}, g{0.5}, d{0.0};
    s.adam_step(w.data(), m.data(), v.data(), g.data(), 1, 0.1, 0.9, 0.999, 0.1, 0.001, 1e-8, d.data());
    CHECK(m[0] == doctest::Approx(0.05));
    CHECK(v[0] == doctest::Approx(0.00025));
    CHECK(d[0] == doctest::Approx(0.5 + 1e-8));
    CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)));
}

TEST_CASE("active table is one of the two") {
    const auto& a = kernels::active();
    CHECK((a.name == "scalar" || a.name == "avx2"));
}
