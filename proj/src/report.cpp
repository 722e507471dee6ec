#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "hklab/checkers.hpp"
#include "hklab/errors.hpp"
#include "hklab/graph_io.hpp"

namespace hklab {

using nlohmann::json;

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    if (!j.is_object()) throw DomainError(std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* s) { return k == s; }) == known.end()) {
            throw DomainError("unknown key '" + k + "' in " + where);
        }
    }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const GridSpec& s) {
    return json{{"centers", s.centers},  {"labels", s.labels}, {"vertices", s.vertices},
                {"count", s.count},      {"r0", s.r0},         {"r_max", s.r_max},
                {"times", s.times},      {"horizon", s.horizon}, {"fit_min_radius", s.fit_min_radius}};
}

GridSpec grid_spec_from_json(const json& j) {
    reject_unknown(j, {"centers", "labels", "vertices", "count", "r0", "r_max", "times", "horizon", "fit_min_radius"},
                   "grid");
    GridSpec s;
    try {
        read_key(j, "centers", s.centers);
        read_key(j, "labels", s.labels);
        read_key(j, "vertices", s.vertices);
        read_key(j, "count", s.count);
        read_key(j, "r0", s.r0);
        read_key(j, "r_max", s.r_max);
        read_key(j, "times", s.times);
        read_key(j, "horizon", s.horizon);
        read_key(j, "fit_min_radius", s.fit_min_radius);
    } catch (const json::exception& e) {
        throw DomainError(std::string("grid: ") + e.what());
    }
    static const std::set<std::string> strategies{"auto", "labels", "vertices", "random"};
    if (!strategies.contains(s.centers)) throw DomainError("grid.centers must be auto, labels, vertices or random");
    if (s.r0 < 1) throw DomainError("grid.r0 must be at least 1");
    if (s.r_max < 0) throw DomainError("grid.r_max must be nonnegative");
    if (s.count < 1) throw DomainError("grid.count must be positive");
    if (s.horizon < 2) throw DomainError("grid.horizon must be at least 2");
    for (int t : s.times) {
        if (t < 1) throw DomainError("grid.times must be positive");
    }
    return s;
}

std::size_t Grid::cell_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (int R : radii) c += admissible(i, R) ? 1 : 0;
    }
    return c;
}

json Grid::to_json() const {
    return json{{"centers", centers}, {"safe_radius", safe}, {"radii", radii}, {"times", times},
                {"fit_min_radius", fit_min_radius}};
}

Grid make_grid(Workspace& ws, const GridSpec& spec, std::uint64_t seed) {
    const WeightedGraph& g = ws.graph();
    Grid grid;
    grid.fit_min_radius = spec.fit_min_radius;
    if (spec.centers == "auto") {
        Vertex c = 0;
        for (const char* name : {"z0", "center", "c0"}) {
            if (g.has_label(name)) {
                c = g.label(name);
                break;
            }
        }
        grid.centers.push_back(c);
    } else if (spec.centers == "labels") {
        if (spec.labels.empty()) throw DomainError("grid.labels is empty");
        for (const auto& name : spec.labels) grid.centers.push_back(g.label(name));
    } else if (spec.centers == "vertices") {
        if (spec.vertices.empty()) throw DomainError("grid.vertices is empty");
        for (Vertex v : spec.vertices) {
            g.require_vertex(v);
            grid.centers.push_back(v);
        }
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<Vertex> pick(0, g.vertex_count() - 1);
        std::set<Vertex> chosen;
        const long attempts = 50L * spec.count;
        for (long a = 0; a < attempts && static_cast<int>(chosen.size()) < spec.count; ++a) {
            Vertex v = pick(rng);
            if (!chosen.contains(v) && ws.safe_radius(v) >= 2 * spec.r0) chosen.insert(v);
        }
        if (chosen.empty()) throw TruncationError("no vertex admits the radius 2*r0");
        grid.centers.assign(chosen.begin(), chosen.end());
    }
    std::sort(grid.centers.begin(), grid.centers.end());
    grid.centers.erase(std::unique(grid.centers.begin(), grid.centers.end()), grid.centers.end());

    int reach = 0;
    for (Vertex c : grid.centers) {
        grid.safe.push_back(ws.safe_radius(c));
        reach = std::max(reach, grid.safe.back());
    }
    for (long R = spec.r0; 2 * R <= reach && (spec.r_max == 0 || R <= spec.r_max); R *= 2) {
        grid.radii.push_back(static_cast<int>(R));
    }
    if (!spec.times.empty()) {
        grid.times = spec.times;
        std::sort(grid.times.begin(), grid.times.end());
        grid.times.erase(std::unique(grid.times.begin(), grid.times.end()), grid.times.end());
    } else {
        for (long n = 2; n <= spec.horizon; n *= 2) grid.times.push_back(static_cast<int>(n));
    }
    return grid;
}

ExponentFit fit_exponent(std::span<const std::pair<double, double>> series) {
    return fit_exponent_panel({std::vector<std::pair<double, double>>(series.begin(), series.end())});
}

ExponentFit fit_exponent_panel(const std::vector<std::vector<std::pair<double, double>>>& series) {
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    int points = 0;
    std::set<double> radii;
    for (const auto& s : series) {
        for (auto [R, v] : s) {
            if (!(R > 0.0) || !(v > 0.0) || !std::isfinite(v)) {
                throw DomainError("exponent fit needs positive radii and values");
            }
        }
        if (s.size() < 2) continue;
        double mx = 0.0, my = 0.0;
        for (auto [R, v] : s) {
            mx += std::log(R);
            my += std::log(v);
        }
        mx /= static_cast<double>(s.size());
        my /= static_cast<double>(s.size());
        for (auto [R, v] : s) {
            const double dx = std::log(R) - mx;
            const double dy = std::log(v) - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
            radii.insert(R);
        }
        points += static_cast<int>(s.size());
    }
    if (points < 3 || radii.size() < 2 || !(sxx > 0.0)) {
        throw DomainError("degenerate series: need 3 points over at least 2 distinct radii");
    }
    ExponentFit fit;
    fit.exponent = sxy / sxx;
    fit.points = points;
    const double ss_res = syy - fit.exponent * sxy;
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

Thresholds default_thresholds() {
    auto below = [](double v) { return Bound{std::nullopt, v}; };
    auto above = [](double v) { return Bound{v, std::nullopt}; };
    Thresholds t;
    t["volume_doubling"] = {{"D_V", below(32.0)}, {"C_V", below(256.0)}, {"V3_min", above(0.05)}};
    t["time_conditions"] = {{"D_T", below(64.0)}, {"C_T", below(256.0)}, {"beta", above(1.95)}};
    t["uniform_exit"] = {{"C0", below(10.0)}};
    t["einstein"] = {{"ratio_spread", below(10.0)}, {"rrvA", below(100.0)}, {"rv_violations", below(0.0)}};
    t["mean_value"] = {{"C_MV", below(20.0)}, {"C_MVG", below(20.0)}};
    t["harnack_elliptic"] = {{"C_H", below(50.0)}, {"mp_violations", below(0.0)}};
    t["harnack_parabolic"] = {{"C_H", below(1e30)}};
    t["kernel_bounds"] = {{"DUE_spread", below(20.0)}, {"DLE_min", above(1e-3)}, {"c_UE", above(1e-6)},
                          {"c_UEF", above(1e-6)},      {"c_LT", above(1e-6)}};
    t["green_bounds"] = {{"C_g01", below(10.0)}, {"C_UBG", below(10.0)}};
    return t;
}

json to_json(const Thresholds& t) {
    json out = json::object();
    for (const auto& [cond, metrics] : t) {
        json m = json::object();
        for (const auto& [name, b] : metrics) {
            json bound = json::object();
            if (b.min) bound["min"] = *b.min;
            if (b.max) bound["max"] = *b.max;
            m[name] = bound;
        }
        out[cond] = m;
    }
    return out;
}

Thresholds thresholds_from_json(const json& j) {
    Thresholds t = default_thresholds();
    if (!j.is_object()) throw DomainError("thresholds must be a JSON object");
    for (const auto& [cond, metrics] : j.items()) {
        if (!t.contains(cond)) throw DomainError("thresholds for unknown checker '" + cond + "'");
        if (!metrics.is_object()) throw DomainError("thresholds." + cond + " must be an object");
        for (const auto& [name, bound] : metrics.items()) {
            reject_unknown(bound, {"min", "max"}, ("thresholds." + cond + "." + name).c_str());
            Bound b;
            try {
                if (bound.contains("min")) b.min = bound.at("min").get<double>();
                if (bound.contains("max")) b.max = bound.at("max").get<double>();
            } catch (const json::exception& e) {
                throw DomainError("thresholds." + cond + "." + name + ": " + e.what());
            }
            t[cond][name] = b;
        }
    }
    return t;
}

json options_to_json(const CheckOptions& o) {
    return json{{"seed", o.seed},   {"trials", o.trials},   {"comparison_points", o.comparison_points},
                {"mc_walks", o.mc_walks}, {"pairs", o.pairs}, {"c_prime", o.c_prime},
                {"profile", o.profile}, {"parabolic_budget", o.parabolic_budget}};
}

void apply_options(CheckOptions& o, const json& j) {
    reject_unknown(j, {"seed", "trials", "comparison_points", "mc_walks", "pairs", "c_prime", "profile", "parabolic_budget"},
                   "options");
    try {
        read_key(j, "seed", o.seed);
        read_key(j, "trials", o.trials);
        read_key(j, "comparison_points", o.comparison_points);
        read_key(j, "mc_walks", o.mc_walks);
        read_key(j, "pairs", o.pairs);
        read_key(j, "c_prime", o.c_prime);
        read_key(j, "profile", o.profile);
        read_key(j, "parabolic_budget", o.parabolic_budget);
    } catch (const json::exception& e) {
        throw DomainError(std::string("options: ") + e.what());
    }
    if (o.trials < 0) throw DomainError("options.trials must be nonnegative");
    if (o.comparison_points < 2) throw DomainError("options.comparison_points must be at least 2");
    if (o.mc_walks < 2) throw DomainError("options.mc_walks must be at least 2");
    if (o.pairs < 0) throw DomainError("options.pairs must be nonnegative");
    if (!(o.c_prime > 1.0)) throw DomainError("options.c_prime must exceed 1");
    const auto& p = o.profile;
    if (!(0.0 < p[0] && p[0] < p[1] && p[1] < p[2] && p[2] < p[3] && 0.0 < p[4] && p[4] < 1.0)) {
        throw DomainError("options.profile must satisfy 0 < c1 < c2 < c3 < c4 and 0 < eta < 1");
    }
}

std::optional<double> ConditionReport::metric(const std::string& name) const {
    auto it = metrics.find(name);
    if (it == metrics.end()) return std::nullopt;
    return it->second;
}

json ConditionReport::to_json() const {
    json cell_list = json::array();
    for (const auto& c : cells) {
        json jc{{"x", c.x}, {"R", c.R}, {"value", number_or_null(c.value)}};
        if (c.n > 0) jc["n"] = c.n;
        for (const auto& [k, v] : c.extra) jc[k] = number_or_null(v);
        if (!c.flag.empty()) jc["flag"] = c.flag;
        cell_list.push_back(std::move(jc));
    }
    json summary{{"max", number_or_null(max)}, {"min", number_or_null(min)}, {"spread", number_or_null(spread)},
                 {"exponent", nullptr}, {"r2", nullptr}};
    if (exponent) {
        summary["exponent"] = number_or_null(exponent->exponent);
        summary["r2"] = number_or_null(exponent->r2);
    }
    json m = json::object();
    for (const auto& [k, v] : metrics) m[k] = number_or_null(v);
    json check_list = json::array();
    for (const auto& c : checks) {
        json jc{{"metric", c.metric}, {"value", c.value ? number_or_null(*c.value) : json(nullptr)}, {"pass", c.pass}};
        if (c.bound.min) jc["min"] = *c.bound.min;
        if (c.bound.max) jc["max"] = *c.bound.max;
        check_list.push_back(std::move(jc));
    }
    return json{{"schema", kReportSchema}, {"condition", condition}, {"graph_spec", graph_spec},
                {"grid", grid.to_json()},  {"config", config},       {"cells", cell_list},
                {"summary", summary},      {"metrics", m},           {"checks", check_list},
                {"verdict", pass ? "pass" : "fail"}};
}

std::string ConditionReport::to_csv() const {
    std::set<std::string> keys;
    for (const auto& c : cells) {
        for (const auto& [k, v] : c.extra) keys.insert(k);
    }
    std::ostringstream out;
    out << "x,R,n,value";
    for (const auto& k : keys) out << "," << k;
    out << ",flag\n";
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    for (const auto& c : cells) {
        out << c.x << "," << c.R << "," << (c.n > 0 ? std::to_string(c.n) : "") << "," << num(c.value);
        for (const auto& k : keys) {
            auto it = c.extra.find(k);
            out << "," << (it == c.extra.end() ? "" : num(it->second));
        }
        std::string flag = c.flag;
        std::replace(flag.begin(), flag.end(), ',', ';');
        out << "," << flag << "\n";
    }
    return out.str();
}

}  // namespace hklab
