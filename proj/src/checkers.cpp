#include "hklab/checkers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Core>

#include "hklab/dirichlet.hpp"
#include "hklab/errors.hpp"
#include "hklab/graph_io.hpp"
#include "hklab/parallel.hpp"
#include "hklab/potential.hpp"

namespace hklab {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t tag, Vertex x, int R) {
    return mix(mix(mix(seed, tag), static_cast<std::uint64_t>(x)), static_cast<std::uint64_t>(R));
}

struct Task {
    std::size_t ci;
    Vertex x;
    int R;
};

std::vector<Task> radius_tasks(const Grid& grid) {
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < grid.centers.size(); ++i) {
        for (int R : grid.radii) {
            if (grid.admissible(i, R)) tasks.push_back({i, grid.centers[i], R});
        }
    }
    return tasks;
}

/// Runs fn on every task; failures become flagged cells instead of aborting the report.
template <typename Fn>
std::vector<CellResult> run_cells(const std::vector<Task>& tasks, int threads, Fn&& fn) {
    std::vector<CellResult> cells(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t i) {
        CellResult& c = cells[i];
        c.x = tasks[i].x;
        c.R = tasks[i].R;
        try {
            fn(tasks[i], c);
        } catch (const TruncationError& e) {
            c.value = kNaN;
            c.flag = std::string("truncated: ") + e.what();
        } catch (const NumericalError& e) {
            c.value = kNaN;
            c.flag = std::string("numerical: ") + e.what();
        } catch (const CapExceededError& e) {
            c.value = kNaN;
            c.flag = std::string("cap: ") + e.what();
        }
    });
    return cells;
}

/// Every member when there are at most cap of them, otherwise an even stride that keeps both ends.
std::vector<Vertex> spread_sample(const std::vector<Vertex>& v, int cap) {
    if (v.size() <= static_cast<std::size_t>(cap)) return v;
    std::vector<Vertex> out;
    const std::size_t m = v.size() - 1;
    for (int i = 0; i < cap; ++i) out.push_back(v[i * m / (cap - 1)]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Vertex> members_of(const std::vector<std::pair<Vertex, int>>& layers) {
    std::vector<Vertex> m;
    m.reserve(layers.size());
    for (auto [v, d] : layers) m.push_back(v);
    return m;
}

double max_extra(const std::vector<CellResult>& cells, const std::string& key) {
    double m = kNaN;
    for (const auto& c : cells) {
        auto it = c.extra.find(key);
        if (it != c.extra.end() && std::isfinite(it->second)) m = std::isnan(m) ? it->second : std::max(m, it->second);
    }
    return m;
}

double min_extra(const std::vector<CellResult>& cells, const std::string& key) {
    double m = kNaN;
    for (const auto& c : cells) {
        auto it = c.extra.find(key);
        if (it != c.extra.end() && std::isfinite(it->second)) m = std::isnan(m) ? it->second : std::min(m, it->second);
    }
    return m;
}

void set_metric(ConditionReport& r, const std::string& name, double v) {
    if (std::isfinite(v)) r.metrics[name] = v;
}

ConditionReport start_report(const std::string& condition, Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r;
    r.condition = condition;
    r.grid = grid;
    json cfg = options_to_json(opt);
    Thresholds own;
    if (auto it = opt.thresholds.find(condition); it != opt.thresholds.end()) own[condition] = it->second;
    cfg["thresholds"] = to_json(own).value(condition, json::object());
    r.config = cfg;
    r.graph_spec = nullptr;
    (void)ws;
    return r;
}

void summarize(ConditionReport& r) {
    double mx = kNaN, mn = kNaN;
    for (const auto& c : r.cells) {
        if (!std::isfinite(c.value)) continue;
        mx = std::isnan(mx) ? c.value : std::max(mx, c.value);
        mn = std::isnan(mn) ? c.value : std::min(mn, c.value);
    }
    r.max = mx;
    r.min = mn;
    r.spread = (std::isfinite(mx) && mn > 0.0) ? mx / mn : kNaN;
}

/// Verdict: some cell was measured and every configured metric lies in its band.
void finalize(ConditionReport& r, const CheckOptions& opt) {
    summarize(r);
    r.checks.clear();
    bool pass = std::isfinite(r.max);
    if (auto it = opt.thresholds.find(r.condition); it != opt.thresholds.end()) {
        for (const auto& [name, bound] : it->second) {
            MetricCheck c;
            c.metric = name;
            c.bound = bound;
            c.value = r.metric(name);
            c.pass = c.value.has_value() && (!bound.min || *c.value >= *bound.min) &&
                     (!bound.max || *c.value <= *bound.max);
            pass = pass && c.pass;
            r.checks.push_back(c);
        }
    }
    r.pass = pass;
}

/// Per-center series (R, q(x,R)) and (2R, q(x,2R)) over admissible cells with radius >= fit_min_radius.
template <typename Quantity>
std::optional<ExponentFit> fit_over_grid(const Grid& grid, Quantity&& q) {
    std::vector<std::vector<std::pair<double, double>>> series;
    for (std::size_t i = 0; i < grid.centers.size(); ++i) {
        std::vector<int> rs;
        for (int R : grid.radii) {
            if (!grid.admissible(i, R)) continue;
            rs.push_back(R);
            rs.push_back(2 * R);
        }
        std::sort(rs.begin(), rs.end());
        rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
        std::vector<std::pair<double, double>> s;
        for (int R : rs) {
            if (R >= grid.fit_min_radius) s.emplace_back(R, q(grid.centers[i], R));
        }
        series.push_back(std::move(s));
    }
    try {
        return fit_exponent_panel(series);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

/// Smallest power of two A with q(x, A R) >= 2 q(x, R), A R within the safe radius.
template <typename Quantity>
double anti_doubling_factor(int R, int safe, double base, Quantity&& q) {
    for (long A = 2; A * R <= safe; A *= 2) {
        if (q(static_cast<int>(A * R)) >= 2.0 * base) return static_cast<double>(A);
    }
    return kNaN;
}

}  // namespace

ScaleFunction grid_scale_function(Workspace& ws, const Grid& grid, int r_limit, double stop_at, int threads) {
    if (grid.centers.empty()) throw DomainError("grid has no centers");
    int reach = *std::max_element(grid.safe.begin(), grid.safe.end());
    if (r_limit > 0) reach = std::min(reach, r_limit);
    std::vector<double> F;
    // chunks of radii in parallel; stop once F has passed stop_at
    const int chunk = std::max(8, 4 * threads);
    for (int lo = 1; lo <= reach && !(F.size() && F.back() >= stop_at); lo += chunk) {
        const int hi = std::min(reach, lo + chunk - 1);
        std::vector<double> part(hi - lo + 1, std::numeric_limits<double>::infinity());
        parallel_for(part.size(), threads, [&](std::size_t k) {
            const int r = lo + static_cast<int>(k);
            for (std::size_t i = 0; i < grid.centers.size(); ++i) {
                if (r <= grid.safe[i]) part[k] = std::min(part[k], ws.exit_time(grid.centers[i], r));
            }
        });
        F.insert(F.end(), part.begin(), part.end());
    }
    return ScaleFunction(std::move(F), grid.centers);
}

ConditionReport check_volume_doubling(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("volume_doubling", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    r.cells = run_cells(radius_tasks(grid), opt.threads, [&](const Task& t, CellResult& c) {
        const double V1 = ws.volume(t.x, t.R);
        const double V2 = ws.volume(t.x, 2 * t.R);
        c.value = V2 / V1;
        double cv = 0.0;
        for (Vertex y : spread_sample(members_of(ball_layers(g, t.x, t.R)), opt.comparison_points)) {
            cv = std::max(cv, V2 / ws.volume(y, t.R));
        }
        c.extra["C_V"] = cv;
        c.extra["V3"] = (V2 - V1) / V1;
        c.extra["A_V"] = anti_doubling_factor(t.R, grid.safe[t.ci], V1, [&](int s) { return ws.volume(t.x, s); });
    });
    summarize(r);
    set_metric(r, "D_V", r.max);
    set_metric(r, "C_V", max_extra(r.cells, "C_V"));
    set_metric(r, "A_V", max_extra(r.cells, "A_V"));
    set_metric(r, "V3_min", min_extra(r.cells, "V3"));
    set_metric(r, "V3_max", max_extra(r.cells, "V3"));
    r.exponent = fit_over_grid(grid, [&](Vertex x, int R) { return ws.volume(x, R); });
    if (r.exponent) {
        set_metric(r, "alpha", r.exponent->exponent);
        set_metric(r, "alpha_r2", r.exponent->r2);
    }
    finalize(r, opt);
    return r;
}

ConditionReport check_time_conditions(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("time_conditions", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    r.cells = run_cells(radius_tasks(grid), opt.threads, [&](const Task& t, CellResult& c) {
        const double E1 = ws.exit_time(t.x, t.R);
        const double E2 = ws.exit_time(t.x, 2 * t.R);
        c.value = E2 / E1;
        double ct = 0.0;
        for (Vertex y : spread_sample(members_of(ball_layers(g, t.x, t.R)), opt.comparison_points)) {
            ct = std::max(ct, E2 / ws.exit_time(y, t.R));
        }
        c.extra["C_T"] = ct;
        c.extra["E_over_R2"] = E1 / (static_cast<double>(t.R) * t.R);
        c.extra["A_E"] = anti_doubling_factor(t.R, grid.safe[t.ci], E1, [&](int s) { return ws.exit_time(t.x, s); });
    });
    summarize(r);
    set_metric(r, "D_T", r.max);
    set_metric(r, "C_T", max_extra(r.cells, "C_T"));
    set_metric(r, "E_over_R2_min", min_extra(r.cells, "E_over_R2"));
    const double ae = max_extra(r.cells, "A_E");
    set_metric(r, "A_E", ae);
    if (std::isfinite(ae)) set_metric(r, "beta_prime", 1.0 / std::log2(ae));
    r.exponent = fit_over_grid(grid, [&](Vertex x, int R) { return ws.exit_time(x, R); });
    if (r.exponent) {
        set_metric(r, "beta", r.exponent->exponent);
        set_metric(r, "beta_r2", r.exponent->r2);
    }
    finalize(r, opt);
    return r;
}

ConditionReport check_uniform_exit(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("uniform_exit", ws, grid, opt);
    auto tasks = radius_tasks(grid);
    r.cells = run_cells(tasks, opt.threads, [&](const Task& t, CellResult& c) {
        c.extra["E"] = ws.exit_time(t.x, t.R);
    });
    // value = E(x,R) / min over centers at the same R
    double c0 = kNaN;
    for (int R : grid.radii) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& c : r.cells) {
            if (c.R == R && c.flag.empty()) {
                lo = std::min(lo, c.extra.at("E"));
                hi = std::max(hi, c.extra.at("E"));
            }
        }
        if (!(hi > 0.0)) continue;
        for (auto& c : r.cells) {
            if (c.R == R && c.flag.empty()) c.value = c.extra.at("E") / lo;
        }
        c0 = std::isnan(c0) ? hi / lo : std::max(c0, hi / lo);
    }
    set_metric(r, "C0", c0);
    finalize(r, opt);
    return r;
}

ConditionReport check_einstein(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("einstein", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    r.cells = run_cells(radius_tasks(grid), opt.threads, [&](const Task& t, CellResult& c) {
        const double E2 = ws.exit_time(t.x, 2 * t.R);
        const double rho = annulus_resistance(g, t.x, t.R, 2 * t.R);
        const double v = ws.volume(t.x, 2 * t.R) - ws.volume(t.x, t.R);
        const double bound = static_cast<double>(t.R) * t.R;
        c.value = E2 / (rho * v);
        c.extra["rho"] = rho;
        c.extra["v"] = v;
        c.extra["rv"] = rho * v;
        c.extra["rv_over_bound"] = rho * v / bound;
        c.extra["rv_violation"] = rho * v < bound * (1.0 - 1e-12) ? 1.0 : 0.0;
    });
    summarize(r);
    set_metric(r, "ratio_max", r.max);
    set_metric(r, "ratio_min", r.min);
    set_metric(r, "ratio_spread", r.spread);
    double violations = 0.0;
    for (const auto& c : r.cells) {
        if (c.flag.empty()) violations += c.extra.at("rv_violation");
    }
    r.metrics["rv_violations"] = violations;
    double rrv = kNaN;
    for (int R : grid.radii) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& c : r.cells) {
            if (c.R == R && c.flag.empty()) {
                lo = std::min(lo, c.extra.at("rv"));
                hi = std::max(hi, c.extra.at("rv"));
            }
        }
        if (hi > 0.0) rrv = std::isnan(rrv) ? hi / lo : std::max(rrv, hi / lo);
    }
    set_metric(r, "rrvA", rrv);
    finalize(r, opt);
    return r;
}

double mean_value_ratio(const WeightedGraph& g, Vertex x, int R, std::span<const double> boundary_data) {
    VertexSet B = ball(g, x, R);
    DirichletProblem p = harmonic_extension(g, B, boundary_data);
    double sum = 0.0;
    for (Vertex y : B.members()) sum += p.at(y) * g.measure(y);
    return p.at(x) * B.measure() / sum;
}

double harnack_ratio(const WeightedGraph& g, Vertex x, int R, std::span<const double> boundary_data) {
    VertexSet B2 = ball(g, x, 2 * R);
    DirichletProblem p = harmonic_extension(g, B2, boundary_data);
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (auto [y, d] : ball_layers(g, x, R)) {
        hi = std::max(hi, p.at(y));
        lo = std::min(lo, p.at(y));
    }
    return hi / lo;
}

namespace {

/// Harmonic measures of single boundary points: column w solves M u = W_{.,w}.
struct HarmonicMeasures {
    std::vector<Vertex> boundary;
    std::vector<Eigen::VectorXd> columns;
};

HarmonicMeasures harmonic_measures(const WeightedGraph& g, const DirichletSystem& sys, const VertexSet& domain) {
    HarmonicMeasures h;
    Boundary b = boundary(g, domain);
    for (Vertex w : b.outer.members()) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.size()));
        auto nb = g.neighbors(w);
        auto wt = g.neighbor_weights(w);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const int i = sys.local_index(nb[k]);
            if (i >= 0) rhs[i] += wt[k];
        }
        h.boundary.push_back(w);
        h.columns.push_back(sys.solve(rhs));
    }
    return h;
}

}  // namespace

ConditionReport check_mean_value(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("mean_value", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    r.cells = run_cells(radius_tasks(grid), opt.threads, [&](const Task& t, CellResult& c) {
        auto layers = ball_layers(g, t.x, t.R);
        std::vector<Vertex> members = members_of(layers);
        VertexSet B(g, members);
        DirichletSystem sys(g, members);
        Eigen::VectorXd E = sys.solve(sys.measure());
        Eigen::VectorXd ex = Eigen::VectorXd::Zero(E.size());
        ex[sys.local_index(t.x)] = 1.0;
        Eigen::VectorXd gx = sys.solve(ex);
        // u(x) = sum_w a_w h_w and sum_B u mu = sum_w b_w h_w
        Boundary bd = boundary(g, B);
        std::vector<double> a, b;
        for (Vertex w : bd.outer.members()) {
            double aw = 0.0, bw = 0.0;
            auto nb = g.neighbors(w);
            auto wt = g.neighbor_weights(w);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const int i = sys.local_index(nb[k]);
                if (i < 0) continue;
                aw += gx[i] * wt[k];
                bw += E[i] * wt[k];
            }
            a.push_back(aw);
            b.push_back(bw);
        }
        const double V = B.measure();
        double exact = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) exact = std::max(exact, V * a[k] / b[k]);
        c.value = exact;

        std::mt19937_64 rng(cell_seed(opt.seed, 1, t.x, t.R));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double sampled = 0.0;
        for (int trial = 0; trial < opt.trials; ++trial) {
            double ua = 0.0, ub = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double h = unif(rng);
                ua += a[k] * h;
                ub += b[k] * h;
            }
            if (ub > 0.0) sampled = std::max(sampled, V * ua / ub);
        }
        if (opt.trials > 0) c.extra["C_sampled"] = sampled;

        // Green kernels g^{B(x,2R)}(., w) for w on the sphere d(x,w) = R
        auto outer_layers = ball_layers(g, t.x, 2 * t.R);
        std::vector<Vertex> outer = members_of(outer_layers);
        std::vector<Vertex> sphere;
        for (auto [v, d] : outer_layers) {
            if (d == t.R) sphere.push_back(v);
        }
        DirichletSystem big(g, outer);
        double mvg = 0.0;
        for (Vertex w : spread_sample(sphere, opt.comparison_points)) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outer.size()));
            e[big.local_index(w)] = 1.0;
            Eigen::VectorXd s = big.solve(e);
            double sum = 0.0;
            for (Vertex y : members) sum += s[big.local_index(y)] * g.measure(y);
            mvg = std::max(mvg, s[big.local_index(t.x)] * V / sum);
        }
        if (!sphere.empty()) c.extra["C_MVG"] = mvg;
    });
    summarize(r);
    set_metric(r, "C_MV", r.max);
    set_metric(r, "C_MV_sampled", max_extra(r.cells, "C_sampled"));
    set_metric(r, "C_MVG", max_extra(r.cells, "C_MVG"));
    finalize(r, opt);
    return r;
}

namespace {

void elliptic_cell(const WeightedGraph& g, const Task& t, const CheckOptions& opt, CellResult& c) {
    auto layers = ball_layers(g, t.x, 2 * t.R);
    std::vector<Vertex> members = members_of(layers);
    VertexSet B2(g, members);
    DirichletSystem sys(g, members);
    HarmonicMeasures h = harmonic_measures(g, sys, B2);
    std::vector<int> inner;
    for (auto [v, d] : layers) {
        if (d < t.R) inner.push_back(sys.local_index(v));
    }
    auto ratio = [&](const Eigen::VectorXd& u) {
        double hi = 0.0, lo = std::numeric_limits<double>::infinity();
        for (int i : inner) {
            hi = std::max(hi, u[i]);
            lo = std::min(lo, u[i]);
        }
        return hi / lo;
    };
    double worst = 0.0;
    for (const auto& col : h.columns) worst = std::max(worst, ratio(col));
    c.value = worst;
    c.extra["boundary_points"] = static_cast<double>(h.boundary.size());

    // maximum principle: each harmonic measure lies in [0,1] and together they sum to 1
    Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(members.size()));
    double violations = 0.0;
    for (const auto& col : h.columns) {
        total += col;
        violations += static_cast<double>((col.array() < -1e-12).count() + (col.array() > 1.0 + 1e-12).count());
    }
    violations += static_cast<double>(((total.array() - 1.0).abs() > 1e-9).count());
    c.extra["mp_violations"] = violations;

    std::mt19937_64 rng(cell_seed(opt.seed, 2, t.x, t.R));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double sampled = 0.0;
    for (int trial = 0; trial < opt.trials; ++trial) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(members.size()));
        for (const auto& col : h.columns) u += unif(rng) * col;
        sampled = std::max(sampled, ratio(u));
    }
    if (opt.trials > 0) c.extra["C_sampled"] = sampled;
}

/// Killed heat equation on B(x,R) from every delta initial datum; worst u(U-) / u~(U+).
void parabolic_cell(Workspace& ws, const Task& t, const CheckOptions& opt, CellResult& c) {
    const WeightedGraph& g = ws.graph();
    const auto& p = opt.profile;
    std::array<long, 4> T{};
    for (int i = 0; i < 4; ++i) {
        const int radius = std::max(1, static_cast<int>(std::lround(p[i] * t.R)));
        T[i] = std::lround(ws.exit_time(t.x, radius));
    }
    auto layers = ball_layers(g, t.x, t.R);
    const std::size_t m = layers.size();
    const double work = static_cast<double>(m) * static_cast<double>(m) * static_cast<double>(T[3]);
    if (work > opt.parabolic_budget) {
        throw CapExceededError("parabolic cell needs " + format_double(work) + " kernel updates, over the budget");
    }
    std::vector<int> local(g.vertex_count(), -1);
    for (std::size_t i = 0; i < m; ++i) local[layers[i].first] = static_cast<int>(i);
    std::vector<double> mu(m);
    std::vector<std::size_t> off{0};
    std::vector<int> nbr;
    std::vector<double> wts;
    for (std::size_t i = 0; i < m; ++i) {
        Vertex v = layers[i].first;
        mu[i] = g.measure(v);
        auto nb = g.neighbors(v);
        auto wt = g.neighbor_weights(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (local[nb[k]] >= 0) {
                nbr.push_back(local[nb[k]]);
                wts.push_back(wt[k]);
            }
        }
        off.push_back(nbr.size());
    }
    std::vector<int> inner;
    int inner_radius = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (layers[i].second < p[4] * t.R) {
            inner.push_back(static_cast<int>(i));
            inner_radius = std::max(inner_radius, layers[i].second);
        }
    }
    // the constraint d(x-,x+) <= n+ - n- is implied when the time gap covers the inner diameter
    const bool relaxed = T[2] - T[1] < 2L * inner_radius;
    c.extra["constraint_relaxed"] = relaxed ? 1.0 : 0.0;
    c.extra["T4"] = static_cast<double>(T[3]);

    double worst = 0.0;
    std::vector<double> cur(m), nxt(m), prev_kernel(inner.size());
    for (std::size_t w = 0; w < m; ++w) {
        std::fill(cur.begin(), cur.end(), 0.0);
        cur[w] = 1.0;
        double upper = 0.0;
        std::vector<double> lower(inner.size(), std::numeric_limits<double>::infinity());
        for (long n = 0; n <= T[3] + 1; ++n) {
            for (std::size_t k = 0; k < inner.size(); ++k) {
                const double kern = cur[inner[k]] / mu[inner[k]];
                if (n >= T[0] && n <= T[1]) upper = std::max(upper, kern);
                if (n >= T[2] + 1 && n <= T[3] + 1) lower[k] = std::min(lower[k], prev_kernel[k] + kern);
                prev_kernel[k] = kern;
            }
            for (std::size_t y = 0; y < m; ++y) {
                double acc = 0.0;
                for (std::size_t e = off[y]; e < off[y + 1]; ++e) acc += wts[e] * cur[nbr[e]] / mu[nbr[e]];
                nxt[y] = acc;
            }
            cur.swap(nxt);
        }
        const double lo = *std::min_element(lower.begin(), lower.end());
        if (!(lo > 0.0)) {
            c.flag = "killed solution vanishes on U+";
            return;
        }
        worst = std::max(worst, upper / lo);
    }
    c.value = worst;
}

}  // namespace

ConditionReport check_harnack(Workspace& ws, const Grid& grid, HarnackMode mode, const CheckOptions& opt) {
    const bool elliptic = mode == HarnackMode::elliptic;
    ConditionReport r = start_report(elliptic ? "harnack_elliptic" : "harnack_parabolic", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    r.cells = run_cells(radius_tasks(grid), opt.threads, [&](const Task& t, CellResult& c) {
        if (elliptic) {
            elliptic_cell(g, t, opt, c);
        } else {
            parabolic_cell(ws, t, opt, c);
        }
    });
    summarize(r);
    set_metric(r, "C_H", r.max);
    set_metric(r, "C_H_spread", r.spread);
    if (elliptic) {
        set_metric(r, "C_H_sampled", max_extra(r.cells, "C_sampled"));
        double mp = 0.0;
        for (const auto& c : r.cells) {
            if (auto it = c.extra.find("mp_violations"); it != c.extra.end()) mp += it->second;
        }
        set_metric(r, "mp_violations", mp);
    }
    finalize(r, opt);
    return r;
}

namespace {

struct OffDiagonal {
    double log_product;  // log(p_n(x,y) V(x,e(x,n)))
    double t_ue;         // (E(x,d)/n)^{1/(beta-1)}
    double k_f;          // k(n,d)
};

/// Least squares through the origin of -y against t: y ~ -c t.
double origin_slope(const std::vector<std::pair<double, double>>& ty) {
    double num = 0.0, den = 0.0;
    for (auto [t, y] : ty) {
        num += -y * t;
        den += t * t;
    }
    return den > 0.0 ? num / den : kNaN;
}

}  // namespace

ConditionReport check_kernel_bounds(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("kernel_bounds", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    if (grid.times.empty()) throw DomainError("kernel bounds need a nonempty time grid");
    const int n_max = grid.times.back();

    auto beta_fit = fit_over_grid(grid, [&](Vertex x, int R) { return ws.exit_time(x, R); });
    const int reach = *std::max_element(grid.safe.begin(), grid.safe.end());
    const ScaleFunction F = grid_scale_function(ws, grid, reach / 2, std::numeric_limits<double>::infinity(), opt.threads);

    std::vector<std::vector<CellResult>> per_center(grid.centers.size());
    std::vector<std::vector<OffDiagonal>> samples(grid.centers.size());
    parallel_for(grid.centers.size(), opt.threads, [&](std::size_t ci) {
        const Vertex x = grid.centers[ci];
        const int safe = grid.safe[ci];
        std::vector<double> diag(n_max + 2);
        std::vector<std::vector<double>> rows;
        HeatStepper walk(g, x);
        std::size_t next_time = 0;
        for (int n = 0; n <= n_max + 1; ++n) {
            if (n > 0) walk.step();
            diag[n] = walk.kernel(x);
            if (next_time < grid.times.size() && grid.times[next_time] == n) {
                rows.emplace_back(walk.distribution().begin(), walk.distribution().end());
                ++next_time;
            }
        }
        DistanceField df = distance_field(g, x, safe / 2);
        std::vector<Vertex> candidates;
        for (Vertex v : df.order) {
            if (df.at(v) >= 1) candidates.push_back(v);
        }
        for (std::size_t ti = 0; ti < grid.times.size(); ++ti) {
            const int n = grid.times[ti];
            CellResult c;
            c.x = x;
            c.n = n;
            try {
                const int e = exit_time_inverse(ws, x, n);
                c.R = e;
                if (2 * e > safe) throw TruncationError("e(x,n) = " + std::to_string(e) + " exceeds half the safe radius");
                const double V = ws.volume(x, e);
                c.value = diag[n] * V;
                c.extra["DLE"] = (diag[n] + diag[n + 1]) * V;
                if (!(c.value > 0.0)) {
                    c.value = kNaN;
                    c.flag = "parity: p_n(x,x) = 0";
                    per_center[ci].push_back(c);
                    continue;
                }
                std::mt19937_64 rng(cell_seed(opt.seed, 3, x, n));
                for (int s = 0; s < opt.pairs && !candidates.empty(); ++s) {
                    const Vertex y = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
                    const double P = rows[ti][y];
                    if (!(P > 1e-12)) continue;
                    const int d = df.at(y);
                    OffDiagonal od;
                    od.log_product = std::log(P / g.measure(y) * V);
                    od.t_ue = beta_fit && beta_fit->exponent > 1.0
                                  ? std::pow(ws.exit_time(x, d) / n, 1.0 / (beta_fit->exponent - 1.0))
                                  : kNaN;
                    od.k_f = subgaussian_k(F, n, d);
                    samples[ci].push_back(od);
                }
            } catch (const TruncationError& err) {
                c.value = kNaN;
                c.flag = std::string("truncated: ") + err.what();
            }
            per_center[ci].push_back(c);
        }
    });
    for (auto& v : per_center) {
        for (auto& c : v) r.cells.push_back(std::move(c));
    }

    // exit-time tails against the local k function
    auto tasks = radius_tasks(grid);
    std::vector<std::vector<std::pair<double, double>>> tails(tasks.size());
    parallel_for(tasks.size(), opt.threads, [&](std::size_t i) {
        const Task& t = tasks[i];
        try {
            std::vector<long> ns(grid.times.begin(), grid.times.end());
            McExitResult mc = mc_exit_time(g, t.x, t.R, opt.mc_walks, cell_seed(opt.seed, 4, t.x, t.R), ns, n_max, 1);
            for (auto [n, prob] : mc.tail) {
                if (!(prob > 1e-12)) continue;
                const int k = local_k(ws, static_cast<double>(n), t.x, t.R);
                if (k >= 1) tails[i].emplace_back(k, std::log(prob));
            }
        } catch (const TruncationError&) {
        }
    });

    summarize(r);
    set_metric(r, "DUE_max", r.max);
    set_metric(r, "DUE_min", r.min);
    set_metric(r, "DUE_spread", r.spread);
    set_metric(r, "DLE_min", min_extra(r.cells, "DLE"));
    if (beta_fit) set_metric(r, "beta_used", beta_fit->exponent);

    std::vector<std::pair<double, double>> ue, uef;
    const double log_c = std::log(r.max);
    for (const auto& s : samples) {
        for (const auto& od : s) {
            if (std::isfinite(od.t_ue)) ue.emplace_back(od.t_ue, od.log_product - log_c);
            uef.emplace_back(od.k_f, od.log_product - log_c);
        }
    }
    r.metrics["UE_samples"] = static_cast<double>(uef.size());
    if (std::isfinite(log_c)) {
        set_metric(r, "c_UE", origin_slope(ue));
        set_metric(r, "c_UEF", origin_slope(uef));
    }

    // log P(T < n) = a - c k
    std::vector<std::pair<double, double>> pts;
    for (const auto& v : tails) pts.insert(pts.end(), v.begin(), v.end());
    r.metrics["LT_points"] = static_cast<double>(pts.size());
    if (pts.size() >= 3) {
        double mk = 0.0, ml = 0.0;
        for (auto [k, l] : pts) {
            mk += k;
            ml += l;
        }
        mk /= static_cast<double>(pts.size());
        ml /= static_cast<double>(pts.size());
        double sxy = 0.0, sxx = 0.0;
        for (auto [k, l] : pts) {
            sxy += (k - mk) * (l - ml);
            sxx += (k - mk) * (k - mk);
        }
        if (sxx > 0.0) set_metric(r, "c_LT", -sxy / sxx);
    }
    finalize(r, opt);
    return r;
}

ConditionReport check_green_bounds(Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    ConditionReport r = start_report("green_bounds", ws, grid, opt);
    const WeightedGraph& g = ws.graph();
    double top = 0.0;
    for (const auto& t : radius_tasks(grid)) {
        try {
            top = std::max(top, ws.exit_time(t.x, t.R));
        } catch (const TruncationError&) {
        }
    }
    const ScaleFunction F = grid_scale_function(ws, grid, 0, opt.c_prime * top, opt.threads);
    r.cells = run_cells(radius_tasks(grid), opt.threads, [&](const Task& t, CellResult& c) {
        auto layers = ball_layers(g, t.x, t.R);
        std::vector<Vertex> members = members_of(layers);
        DirichletSystem sys(g, members);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(members.size()));
        e[sys.local_index(t.x)] = 1.0;
        Eigen::VectorXd gx = sys.solve(e);
        const double E = ws.exit_time(t.x, t.R);

        // S(d) = sum_{F(d) <= i <= C' F(R)} 1 / V(x, f(i)), grouped by f(i) = r
        std::vector<double> S(t.R + 1, kNaN);
        bool ubg = true;
        try {
            const double top = std::floor(opt.c_prime * F(t.R));
            for (int d = 1; d < t.R; ++d) {
                const double lo_i = std::ceil(F(d));
                double sum = 0.0;
                for (int rr = d; rr <= F.max_radius(); ++rr) {
                    const double a = std::max(lo_i, std::floor(F(rr - 1)) + 1.0);
                    const double b = std::min(top, std::floor(F(rr)));
                    if (b >= a) sum += (b - a + 1.0) / ws.volume(t.x, rr);
                    if (F(rr) >= top) break;
                    if (rr == F.max_radius()) throw TruncationError("f(C' F(R)) lies beyond the tabulated F");
                }
                S[d] = sum;
            }
        } catch (const TruncationError&) {
            ubg = false;
        }
        double c01 = 0.0, cubg = 0.0;
        for (auto [y, d] : layers) {
            if (d == 0) continue;
            const double gy = gx[sys.local_index(y)];
            c01 = std::max(c01, gy * ws.volume(t.x, d) / E);
            if (ubg) cubg = std::max(cubg, gy / S[d]);
        }
        if (layers.size() < 2) {
            c.flag = "no y with d(x,y) > 0";
            return;
        }
        c.value = c01;
        if (ubg) {
            c.extra["C_UBG"] = cubg;
        } else {
            c.flag = "UBG sum truncated";
        }
    });
    summarize(r);
    set_metric(r, "C_g01", r.max);
    set_metric(r, "C_UBG", max_extra(r.cells, "C_UBG"));
    finalize(r, opt);
    return r;
}

const std::vector<std::string>& checker_names() {
    static const std::vector<std::string> names{"volume_doubling", "time_conditions",   "uniform_exit",
                                                "einstein",        "mean_value",        "harnack_elliptic",
                                                "harnack_parabolic", "kernel_bounds",   "green_bounds"};
    return names;
}

ConditionReport run_checker(const std::string& name, Workspace& ws, const Grid& grid, const CheckOptions& opt) {
    if (name == "volume_doubling") return check_volume_doubling(ws, grid, opt);
    if (name == "time_conditions") return check_time_conditions(ws, grid, opt);
    if (name == "uniform_exit") return check_uniform_exit(ws, grid, opt);
    if (name == "einstein") return check_einstein(ws, grid, opt);
    if (name == "mean_value") return check_mean_value(ws, grid, opt);
    if (name == "harnack_elliptic") return check_harnack(ws, grid, HarnackMode::elliptic, opt);
    if (name == "harnack_parabolic") return check_harnack(ws, grid, HarnackMode::parabolic, opt);
    if (name == "kernel_bounds") return check_kernel_bounds(ws, grid, opt);
    if (name == "green_bounds") return check_green_bounds(ws, grid, opt);
    throw DomainError("unknown checker '" + name + "'");
}

}  // namespace hklab
