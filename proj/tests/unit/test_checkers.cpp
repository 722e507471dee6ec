#include <doctest.h>

#include <cmath>
#include <random>

#include "hklab/checkers.hpp"
#include "hklab/errors.hpp"
#include "hklab/generators.hpp"
#include "hklab/potential.hpp"

using namespace hklab;
using nlohmann::json;

namespace {

ConditionReport run(const WeightedGraph& g, const std::string& name, const json& grid = json::object(), int threads = 1) {
    Workspace ws(g);
    Grid gr = make_grid(ws, grid_spec_from_json(grid), 1);
    CheckOptions opt;
    opt.threads = threads;
    return run_checker(name, ws, gr, opt);
}

}  // namespace

TEST_CASE("exponent fits") {
    std::vector<std::pair<double, double>> sq, flat, few;
    for (double r : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        sq.push_back({r, r * r});
        flat.push_back({r, 3.0});
    }
    auto a = fit_exponent(sq);
    CHECK(a.exponent == doctest::Approx(2.0));
    CHECK(a.r2 == doctest::Approx(1.0));
    CHECK(a.points == 5);
    CHECK(fit_exponent(flat).exponent == doctest::Approx(0.0).epsilon(1e-12));
    few = {{2.0, 4.0}, {2.0, 5.0}, {2.0, 6.0}};
    CHECK_THROWS_AS(fit_exponent(few), DomainError);
    CHECK_THROWS_AS(fit_exponent(std::span(sq).first(2)), DomainError);

    std::vector<std::pair<double, double>> shifted;
    for (auto [r, v] : sq) shifted.push_back({r, 7 * v});
    auto p = fit_exponent_panel({sq, shifted});
    CHECK(p.exponent == doctest::Approx(2.0));
    CHECK(p.points == 10);
}

TEST_CASE("grid specs are strict") {
    CHECK_THROWS_AS(grid_spec_from_json({{"radius", 3}}), DomainError);
    CHECK_THROWS_AS(grid_spec_from_json({{"centers", "everywhere"}}), DomainError);
    CHECK_THROWS_AS(grid_spec_from_json({{"r0", 0}}), DomainError);
    auto s = grid_spec_from_json({{"centers", "labels"}, {"labels", {"c0"}}, {"r0", 2}});
    CHECK(grid_spec_from_json(to_json(s)).labels == s.labels);

    auto g = sierpinski_gasket(5);
    Workspace ws(g);
    Grid gr = make_grid(ws, s, 1);
    REQUIRE(gr.centers.size() == 1);
    CHECK(gr.centers[0] == g.label("c0"));
    CHECK(gr.radii.front() == 2);
    for (int R : gr.radii) CHECK(2 * R <= gr.safe[0]);
    CHECK(gr.times.front() == 2);
    CHECK_THROWS_AS(make_grid(ws, grid_spec_from_json({{"centers", "labels"}, {"labels", {"nope"}}}), 1), DomainError);

    Grid r1 = make_grid(ws, grid_spec_from_json({{"centers", "random"}, {"count", 5}}), 9);
    Grid r2 = make_grid(ws, grid_spec_from_json({{"centers", "random"}, {"count", 5}}), 9);
    CHECK(r1.centers == r2.centers);
}

TEST_CASE("thresholds and options") {
    auto t = thresholds_from_json({{"uniform_exit", {{"C0", {{"max", 2.5}}}}}});
    CHECK(*t["uniform_exit"]["C0"].max == 2.5);
    CHECK(t["einstein"] == default_thresholds()["einstein"]);
    CHECK_THROWS_AS(thresholds_from_json({{"bogus", json::object()}}), DomainError);
    CheckOptions o;
    apply_options(o, {{"trials", 7}});
    CHECK(o.trials == 7);
    CHECK_THROWS_AS(apply_options(o, {{"walks", 7}}), DomainError);
    CHECK_THROWS_AS(apply_options(o, {{"profile", {1, 2, 3, 4, 2}}}), DomainError);
}

TEST_CASE("Z1 checkers") {
    auto z = lattice_zd(1, 200);
    auto vd = run(z, "volume_doubling");
    CHECK(vd.pass);
    // (8R-2)/(4R-2) at the largest radius
    CHECK(vd.min == doctest::Approx((8.0 * 64 - 2) / (4.0 * 64 - 2)));
    auto tc = run(z, "time_conditions");
    CHECK(*tc.metric("D_T") == doctest::Approx(4.0));
    CHECK(*tc.metric("beta") == doctest::Approx(2.0).epsilon(0.005));
    auto ue = run(z, "uniform_exit", {{"centers", "random"}, {"count", 6}});
    CHECK(*ue.metric("C0") == doctest::Approx(1.0).epsilon(1e-9));
    auto er = run(z, "einstein");
    CHECK(er.max == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(er.min == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(*er.metric("rv_violations") == 0);
    auto eh = run(z, "harnack_elliptic");
    CHECK(eh.pass);
    CHECK(*eh.metric("C_H") <= 3 + 1e-6);
    for (const auto& name : checker_names()) CHECK_MESSAGE(run(z, name).pass, name);
}

TEST_CASE("gasket exponents") {
    auto g = sierpinski_gasket(6);
    auto vd = run(g, "volume_doubling");
    CHECK(*vd.metric("alpha") == doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(0.1 / 1.585));
    auto tc = run(g, "time_conditions");
    CHECK(std::abs(*tc.metric("beta") - std::log(5.0) / std::log(2.0)) <= 0.15);
}

TEST_CASE("reports") {
    auto z = lattice_zd(1, 40);
    auto r = run(z, "einstein");
    json j = r.to_json();
    CHECK(j["schema"] == kReportSchema);
    CHECK(j["condition"] == "einstein");
    CHECK(j["verdict"] == "pass");
    CHECK(j["cells"].size() == r.cells.size());
    CHECK(j["grid"]["centers"][0] == z.label("center"));
    CHECK(r.to_csv().rfind("x,R,n,value,", 0) == 0);
    CHECK_THROWS_AS(run(z, "no_such_checker"), DomainError);

    // impossible threshold flips the verdict
    Workspace ws(z);
    Grid gr = make_grid(ws, GridSpec{}, 1);
    CheckOptions opt;
    opt.thresholds = thresholds_from_json({{"uniform_exit", {{"C0", {{"max", 0.5}}}}}});
    auto bad = check_uniform_exit(ws, gr, opt);
    CHECK_FALSE(bad.pass);
    CHECK(bad.to_json()["verdict"] == "fail");
}

TEST_CASE("results do not depend on the thread count") {
    auto g = sierpinski_gasket(5);
    json grid{{"centers", "random"}, {"count", 4}};
    for (const auto& name : checker_names()) {
        CHECK_MESSAGE(run(g, name, grid, 1).to_json().dump() == run(g, name, grid, 4).to_json().dump(), name);
    }
}

TEST_CASE("independent mean value and harnack ratios") {
    auto z = lattice_zd(1, 40);
    Vertex x = z.label("center");
    // harmonic functions on an interval are affine: the mean over a symmetric ball is the centre value
    CHECK(mean_value_ratio(z, x, 5, std::vector<double>{0.0, 1.0}) == doctest::Approx(1.0));
    // u linear on [x-8, x+8] with data 0 / 1; sup/inf over B(x,4) = (8+3)/(8-3)
    CHECK(harnack_ratio(z, x, 4, std::vector<double>{0.0, 1.0}) == doctest::Approx(11.0 / 5.0));
}

TEST_CASE("stretched vicsek exhibits non-uniform exit times") {
    auto g = stretched_vicsek(3);
    Workspace ws(g);
    Vertex z0 = g.label("z0");
    // a long inserted path is locally one dimensional
    std::vector<Vertex> candidates;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (g.degree(v) == 2 && ws.safe_radius(v) >= 8) candidates.push_back(v);
    }
    REQUIRE_FALSE(candidates.empty());
    double ratio = 0;
    for (Vertex v : candidates) ratio = std::max(ratio, ws.exit_time(z0, 4) / ws.exit_time(v, 4));
    CHECK(ratio > 1.0);
}
