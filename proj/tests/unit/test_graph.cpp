#include <doctest.h>

#include <cmath>
#include <random>

#include "hklab/errors.hpp"
#include "hklab/generators.hpp"
#include "hklab/graph.hpp"
#include "hklab/graph_io.hpp"
#include "oracles.hpp"

using namespace hklab;

TEST_CASE("balls on Z1") {
    auto g = lattice_zd(1, 20);
    Vertex x = g.label("center");
    CHECK(ball(g, x, 1).size() == 1);
    CHECK(volume(g, x, 1) == 2.0);
    CHECK(ball(g, x, 2).size() == 3);
    CHECK(volume(g, x, 2) == 6.0);
    for (int R = 1; R <= 10; ++R) {
        CHECK(volume(g, x, R) == 4.0 * R - 2);
        CHECK(annulus_volume(g, x, R, R) == 0.0);
        CHECK(annulus_volume(g, x, R, 2 * R) == 4.0 * R);
    }
    CHECK_THROWS_AS(annulus_volume(g, x, 3, 2), DomainError);
    CHECK_THROWS_AS(ball(g, 999, 1), DomainError);
}

TEST_CASE("balls stop at the truncation frontier") {
    auto g = lattice_zd(1, 5);
    Vertex x = g.label("center");
    CHECK(safe_radius(g, x) == 5);
    CHECK_NOTHROW(ball(g, x, 5));
    CHECK_THROWS_AS(ball(g, x, 6), TruncationError);
    CHECK_NOTHROW(ball(g.without_frontier(), x, 6));
}

TEST_CASE("gasket level 2 corner ball") {
    auto g = sierpinski_gasket(2);
    CHECK(g.vertex_count() == 15);
    CHECK(ball(g, g.label("c0"), 2).size() == 3);
}

TEST_CASE("vicsek level 1 total measure") {
    auto g = vicsek_tree(1).without_frontier();
    CHECK(volume(g, g.label("z0"), 7) == 40.0);
}

TEST_CASE("annulus volume against a set-difference recount") {
    auto g = sierpinski_gasket(3);
    Vertex c = g.label("c0");
    auto d = oracle::distance_matrix(g);
    auto mu = oracle::measures(g);
    double expect = 0;
    for (Vertex y = 0; y < g.vertex_count(); ++y) {
        if (d[c][y] >= 2 && d[c][y] < 4) expect += mu[y];
    }
    CHECK(annulus_volume(g, c, 2, 4) == doctest::Approx(expect));
}

TEST_CASE("boundary") {
    auto g = lattice_zd(1, 10);
    Vertex x = g.label("center");
    auto b = boundary(g, VertexSet(g, {x}));
    CHECK(b.outer == VertexSet(g, {x - 1, x + 1}));
    auto b3 = boundary(g, ball(g, x, 3));
    CHECK(b3.outer == VertexSet(g, {x - 3, x + 3}));
    CHECK(b3.closure.size() == 7);

    auto all = g.without_frontier();
    std::vector<Vertex> every(all.vertex_count());
    for (Vertex v = 0; v < all.vertex_count(); ++v) every[v] = v;
    auto bf = boundary(all, VertexSet(all, every));
    CHECK(bf.covers_graph);
    CHECK(bf.outer.empty());
}

TEST_CASE("boundary of a vicsek ball against a neighbour scan") {
    auto g = vicsek_tree(1);
    auto A = ball(g, g.label("z0"), 2);
    std::vector<Vertex> expect;
    for (const auto& e : g.edges()) {
        if (A.contains(e.u) != A.contains(e.v)) expect.push_back(A.contains(e.u) ? e.v : e.u);
    }
    CHECK(boundary(g, A).outer == VertexSet(g, expect));
}

TEST_CASE("p0 constant") {
    CHECK(p0_constant(lattice_zd(1, 5)) == 0.5);
    for (int n = 0; n <= 3; ++n) CHECK(p0_constant(vicsek_tree(n)) == 0.25);
    CHECK(p0_constant(WeightedGraph(2, {{0, 1, 1.0}})) == 1.0);
}

TEST_CASE("balls agree with a full distance matrix") {
    for (auto g : {sierpinski_gasket(4).without_frontier(), vicsek_tree(2).without_frontier(),
                   stretched_vicsek(1).without_frontier(), lattice_zd(2, 6).without_frontier()}) {
        REQUIRE(g.vertex_count() <= 500);
        auto d = oracle::distance_matrix(g);
        auto mu = oracle::measures(g);
        for (Vertex x = 0; x < g.vertex_count(); x += 7) {
            for (int R : {1, 2, 3, 5, 8}) {
                std::vector<Vertex> expect;
                double v = 0;
                for (Vertex y = 0; y < g.vertex_count(); ++y) {
                    if (d[x][y] < R) {
                        expect.push_back(y);
                        v += mu[y];
                    }
                }
                CHECK(ball(g, x, R) == VertexSet(g, expect));
                CHECK(volume(g, x, R) == doctest::Approx(v));
            }
        }
    }
}

TEST_CASE("degree, local volume and measure comparability") {
    for (auto g : {sierpinski_gasket(4), vicsek_tree(2), stretched_vicsek(2), weighted_vicsek(2, 1.5)}) {
        const double p0 = p0_constant(g);
        for (Vertex x = 0; x < g.vertex_count(); ++x) CHECK(g.degree(x) <= 1.0 / p0 + 1e-12);
        auto u = g.without_frontier();
        auto d = oracle::distance_matrix(u);
        std::mt19937 rng(5);
        std::uniform_int_distribution<Vertex> pick(0, u.vertex_count() - 1);
        for (int t = 0; t < 200; ++t) {
            Vertex x = pick(rng), y = pick(rng);
            CHECK(std::pow(p0, d[x][y]) * u.measure(y) <= u.measure(x) * (1 + 1e-12));
            int R = 1 + t % 6;
            CHECK(volume(u, x, R) <= std::pow(1.0 / p0, R) * u.measure(x) * (1 + 1e-12));
        }
    }
}

TEST_CASE("hkgraph round trip") {
    auto g = weighted_vicsek(2, 1.25);
    std::string text = to_hkgraph(g);
    auto h = parse_hkgraph(text);
    CHECK(to_hkgraph(h) == text);
    CHECK(h.labels() == g.labels());
    CHECK(text.rfind("hkgraph v1 ", 0) == 0);
    CHECK_THROWS_AS(parse_hkgraph("hkgraph v2 1 0\n"), DomainError);
    CHECK_THROWS_AS(parse_hkgraph("hkgraph v1 2 1\n0 1 -1\n"), DomainError);
}

TEST_CASE("invalid graphs are rejected") {
    CHECK_THROWS_AS(WeightedGraph(2, {{0, 0, 1.0}}), DomainError);
    CHECK_THROWS_AS(WeightedGraph(2, {{0, 1, 0.0}}), DomainError);
    CHECK_THROWS_AS(WeightedGraph(2, {{0, 2, 1.0}}), DomainError);
}
