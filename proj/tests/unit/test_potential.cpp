#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "hklab/errors.hpp"
#include "hklab/generators.hpp"
#include "hklab/potential.hpp"
#include "hklab/walk.hpp"
#include "oracles.hpp"

using namespace hklab;

namespace {

WeightedGraph path(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) e.push_back({i, i + 1, 1.0});
    return WeightedGraph(n + 1, e);
}

// dense Laplacian elimination: potential 1 on A, 0 on B, free elsewhere
double dense_resistance(const WeightedGraph& g, const std::vector<int>& side) {
    const int n = g.vertex_count();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges()) {
        L(e.u, e.u) += e.weight;
        L(e.v, e.v) += e.weight;
        L(e.u, e.v) -= e.weight;
        L(e.v, e.u) -= e.weight;
    }
    std::vector<int> free;
    for (int v = 0; v < n; ++v) {
        if (side[v] == 0) free.push_back(v);
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < n; ++v) f[v] = side[v] == 1 ? 1.0 : 0.0;
    if (!free.empty()) {
        Eigen::MatrixXd A(free.size(), free.size());
        Eigen::VectorXd b(free.size());
        for (std::size_t i = 0; i < free.size(); ++i) {
            b[i] = 0;
            for (int v = 0; v < n; ++v) {
                if (side[v] == 1) b[i] -= L(free[i], v);
            }
            for (std::size_t j = 0; j < free.size(); ++j) A(i, j) = L(free[i], free[j]);
        }
        Eigen::VectorXd x = A.fullPivLu().solve(b);
        for (std::size_t i = 0; i < free.size(); ++i) f[free[i]] = x[i];
    }
    return 1.0 / (f.transpose() * L * f);
}

}  // namespace

TEST_CASE("dirichlet energy") {
    auto g = lattice_zd(1, 10);
    std::vector<double> c(g.vertex_count(), 3.0);
    CHECK(dirichlet_energy(g, c) == 0.0);
    std::vector<double> ind(g.vertex_count(), 0.0);
    ind[g.label("center")] = 1.0;
    // one unit jump across each of the two edges at the center
    CHECK(dirichlet_energy(g, ind) == 2.0);

    auto s = sierpinski_gasket(3);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> f(s.vertex_count());
    for (auto& v : f) v = u(rng);
    // -(Delta f, f)_mu with Delta f(x) = sum_y P(x,y) f(y) - f(x)
    double op = 0;
    for (Vertex x = 0; x < s.vertex_count(); ++x) {
        double lap = -f[x];
        auto nb = s.neighbors(x);
        auto w = s.neighbor_weights(x);
        for (std::size_t i = 0; i < nb.size(); ++i) lap += w[i] / s.measure(x) * f[nb[i]];
        op -= lap * f[x] * s.measure(x);
    }
    CHECK(dirichlet_energy(s, f) == doctest::Approx(op).epsilon(1e-12));
}

TEST_CASE("resistance") {
    for (int n : {1, 2, 5, 17}) {
        auto p = path(n);
        CHECK(effective_resistance(p, VertexSet(p, {0}), VertexSet(p, {n})) == doctest::Approx(n));
    }
    auto z = lattice_zd(1, 200);
    Vertex x = z.label("center");
    for (int R = 1; R <= 100; R += 7) {
        for (int S = 0; S < R; S += 3) CHECK(std::abs(annulus_resistance(z, x, S, R) - (R - S) / 2.0) <= 1e-9);
    }
    CHECK_THROWS_AS(annulus_resistance(z, x, 5, 5), DomainError);
    CHECK_THROWS_AS(annulus_resistance(z, x, 1, 250), TruncationError);
    CHECK_THROWS_AS(effective_resistance(z, VertexSet(z, {x}), VertexSet(z, {x, x + 1})), DomainError);

    CHECK_THROWS(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
}

TEST_CASE("gasket corner to opposite side against dense elimination") {
    auto g = sierpinski_gasket(2).without_frontier();
    REQUIRE(g.vertex_count() == 15);
    Vertex c0 = g.label("c0"), c1 = g.label("c1"), c2 = g.label("c2");
    auto d = oracle::distance_matrix(g);
    std::vector<Vertex> side;
    std::vector<int> mark(15, 0);
    for (Vertex v = 0; v < 15; ++v) {
        if (d[c1][v] + d[v][c2] == d[c1][c2]) {
            side.push_back(v);
            mark[v] = -1;
        }
    }
    mark[c0] = 1;
    CHECK(side.size() == 5);
    double rho = effective_resistance(g, VertexSet(g, {c0}), VertexSet(g, side));
    CHECK(rho == doctest::Approx(dense_resistance(g, mark)).epsilon(1e-12));
}

TEST_CASE("energy resistance duality") {
    auto g = vicsek_tree(2).without_frontier();
    Vertex z0 = g.label("z0");
    auto inner = ball(g, z0, 3);
    auto outer_ball = ball(g, z0, 8);
    std::vector<Vertex> rest, outer;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!outer_ball.contains(v)) outer.push_back(v);
        else if (!inner.contains(v)) rest.push_back(v);
    }
    VertexSet A(g, rest);
    auto h = harmonic_extension(g, A, [&](Vertex v) { return inner.contains(v) ? 1.0 : 0.0; });
    std::vector<double> f(g.vertex_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) f[v] = inner.contains(v) ? 1.0 : (A.contains(v) ? h.at(v) : 0.0);
    double rho = effective_resistance(g, inner, VertexSet(g, outer));
    CHECK(std::abs(dirichlet_energy(g, f) * rho - 1) <= 1e-9);
}

TEST_CASE("green operator") {
    auto z = lattice_zd(1, 40);
    Vertex x = z.label("center");
    GreenOperator one(z, VertexSet(z, {x}));
    CHECK(one.green(x, x) == doctest::Approx(1.0));
    CHECK(one.kernel(x, x) == doctest::Approx(0.5));

    // interval a < y < b: g(y,z) = (y-a)(b-z)/(b-a) for y <= z
    const int a = -7, b = 9;
    std::vector<Vertex> members;
    for (int y = a + 1; y < b; ++y) members.push_back(x + y);
    GreenOperator op(z, VertexSet(z, members));
    for (int y = a + 1; y < b; ++y) {
        for (int w = y; w < b; ++w) {
            double expect = double(y - a) * (b - w) / (b - a);
            CHECK(op.kernel(x + y, x + w) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(op.kernel(x + w, x + y) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    CHECK(op.kernel(x + b, x) == 0.0);
    CHECK(op.max_residual() < 1e-10);

    auto g = sierpinski_gasket(4);
    Vertex c = g.label("c0");
    auto B = ball(g, c, 6);
    GreenOperator gs(g, B);
    auto E = mean_exit_field(g, c, 6);
    for (Vertex y : B.members()) {
        CHECK(std::abs(gs.row_sum(y) - E.at(y)) <= 1e-8 * E.at(y));
        for (Vertex w : B.members()) CHECK(gs.kernel(y, w) >= 0.0);
    }
    CHECK(gs.kernel(c, B.members()[5]) == doctest::Approx(gs.kernel(B.members()[5], c)).epsilon(1e-10));

    GreenOperator big(g, ball(g, c, 12));
    for (Vertex y : B.members()) {
        for (Vertex w : B.members()) CHECK(gs.kernel(y, w) <= big.kernel(y, w) + 1e-12);
    }
}

TEST_CASE("smallest eigenvalue") {
    auto z = lattice_zd(1, 60);
    Vertex x = z.label("center");
    CHECK(smallest_eigenvalue(z, VertexSet(z, {x})).value == doctest::Approx(1.0).epsilon(1e-9));
    for (int m : {1, 2, 3, 10, 41}) {
        std::vector<Vertex> members;
        for (int i = 0; i < m; ++i) members.push_back(x - m / 2 + i);
        auto r = smallest_eigenvalue(z, VertexSet(z, members));
        CHECK(r.value == doctest::Approx(1 - std::cos(std::numbers::pi / (m + 1))).epsilon(1e-8));
    }
    // lambda * Ebar sits in a fixed band
    for (auto g : {sierpinski_gasket(5), vicsek_tree(3)}) {
        Vertex c = g.has_label("c0") ? g.label("c0") : g.label("z0");
        for (int R : {2, 4, 8, 16}) {
            double lam = smallest_eigenvalue(g, ball(g, c, R)).value;
            double Ebar = mean_exit_field(g, c, R).maximum();
            CHECK(lam > 0);
            CHECK(lam <= 2);
            CHECK(lam * Ebar >= 1 - 1e-9);
            CHECK(lam * Ebar <= 2.0);
        }
    }
}

TEST_CASE("harmonic extension") {
    auto z = lattice_zd(1, 30);
    Vertex x = z.label("center");
    auto B = ball(z, x, 6);
    auto c = harmonic_extension(z, B, [](Vertex) { return 4.5; });
    for (Vertex v : B.members()) CHECK(c.at(v) == doctest::Approx(4.5));
    auto lin = harmonic_extension(z, B, [&](Vertex v) { return v > x ? 1.0 : 0.0; });
    for (int i = -5; i <= 5; ++i) CHECK(lin.at(x + i) == doctest::Approx((i + 6) / 12.0));
    CHECK(lin.maximum_principle);

    auto g = sierpinski_gasket(4);
    auto A = ball(g, g.label("c0"), 5);
    auto outer = boundary(g, A).outer;
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> data(outer.size());
    for (auto& v : data) v = u(rng);
    auto h = harmonic_extension(g, A, data);
    CHECK(h.residual < 1e-10);
    CHECK(h.maximum_principle);
    CHECK_THROWS_AS(harmonic_extension(g, A, std::vector<double>(outer.size() + 1, 1.0)), DomainError);
}

TEST_CASE("resolvent kernel") {
    auto z = lattice_zd(1, 20);
    Vertex x = z.label("center");
    VertexSet single(z, {x});
    for (int m : {1, 2, 3}) {
        CHECK(resolvent_kernel(z, single, 0.3, m, x) == doctest::Approx(std::pow(1.3, -m) / 2));
    }
    auto g = sierpinski_gasket(4);
    Vertex c = g.label("c0");
    auto B = ball(g, c, 5);
    double gB = GreenOperator(g, B).kernel(c, c);
    double prev = 0;
    for (double lam : {0.1, 0.01, 0.001, 1e-6}) {
        double v = resolvent_kernel(g, B, lam, 1, c);
        CHECK(v > prev);
        CHECK(v < gB);
        prev = v;
    }
    CHECK(prev == doctest::Approx(gB).epsilon(1e-4));
    CHECK_THROWS_AS(resolvent_kernel(g, B, 1.5, 1, c), DomainError);
}

TEST_CASE("resistance volume lower bound on every annulus") {
    for (auto g : {sierpinski_gasket(5), vicsek_tree(3), stretched_vicsek(2), lattice_zd(2, 12)}) {
        Vertex c = g.has_label("c0") ? g.label("c0") : (g.has_label("z0") ? g.label("z0") : g.label("center"));
        const int safe = safe_radius(g, c);
        for (int R = 2; R < safe; R += 2) {
            for (int S = 1; S < R; S += 2) {
                double prod = annulus_resistance(g, c, S, R) * annulus_volume(g, c, S, R);
                CHECK(prod >= double(R - S) * (R - S) * (1 - 1e-9));
            }
        }
    }
}
