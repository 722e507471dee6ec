#include "hklab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hklab/dirichlet.hpp"
#include "hklab/errors.hpp"
#include "hklab/graph_io.hpp"
#include "hklab/parallel.hpp"
#include "hklab/workspace.hpp"

namespace hklab {

HeatStepper::HeatStepper(const WeightedGraph& g, Vertex source)
    : g_(&g), current_(g.vertex_count(), 0.0), scratch_(g.vertex_count(), 0.0), alive_(g.vertex_count(), 1) {
    g.require_vertex(source);
    current_[source] = 1.0;
}

HeatStepper::HeatStepper(const WeightedGraph& g, Vertex source, const VertexSet& killed_on)
    : HeatStepper(g, source) {
    if (!killed_on.contains(source)) throw DomainError("killed walk must start inside its domain");
    std::fill(alive_.begin(), alive_.end(), 0);
    for (Vertex v : killed_on.members()) alive_[v] = 1;
}

void HeatStepper::step() {
    const Vertex n = g_->vertex_count();
    for (Vertex z = 0; z < n; ++z) scratch_[z] = current_[z] / g_->measure(z);
    for (Vertex y = 0; y < n; ++y) {
        if (!alive_[y]) {
            current_[y] = 0.0;
            continue;
        }
        double acc = 0.0;
        auto nb = g_->neighbors(y);
        auto w = g_->neighbor_weights(y);
        for (std::size_t k = 0; k < nb.size(); ++k) acc += w[k] * scratch_[nb[k]];
        current_[y] = acc;
    }
    ++time_;
}

double HeatProfile::mass(int k) const {
    const auto& row = rows.at(k);
    return std::accumulate(row.begin(), row.end(), 0.0);
}

namespace {

HeatProfile run_profile(const WeightedGraph& g, HeatStepper stepper, Vertex x, int n_max, std::size_t entry_cap) {
    if (n_max < 0) throw DomainError("heat profile horizon must be nonnegative");
    if (static_cast<long double>(n_max + 1) * g.vertex_count() > static_cast<long double>(entry_cap)) {
        throw CapExceededError("heat profile of horizon " + std::to_string(n_max) + " exceeds the entry cap");
    }
    HeatProfile p;
    p.source = x;
    p.horizon = n_max;
    p.measure.assign(g.measures().begin(), g.measures().end());
    p.rows.reserve(n_max + 1);
    p.rows.emplace_back(stepper.distribution().begin(), stepper.distribution().end());
    for (int k = 1; k <= n_max; ++k) {
        stepper.step();
        p.rows.emplace_back(stepper.distribution().begin(), stepper.distribution().end());
    }
    return p;
}

}  // namespace

HeatProfile heat_profile(const WeightedGraph& g, Vertex x, int n_max, std::size_t entry_cap) {
    return run_profile(g, HeatStepper(g, x), x, n_max, entry_cap);
}

HeatProfile heat_profile(const WeightedGraph& g, Vertex x, int n_max, const VertexSet& killed_on,
                         std::size_t entry_cap) {
    HeatProfile p = run_profile(g, HeatStepper(g, x, killed_on), x, n_max, entry_cap);
    p.mode = HeatMode::killed;
    p.killed_on = killed_on;
    return p;
}

double ExitField::maximum() const { return *std::max_element(values.begin(), values.end()); }

double ExitField::at(Vertex z) const {
    auto it = std::find(members.begin(), members.end(), z);
    return it == members.end() ? 0.0 : values[it - members.begin()];
}

ExitField mean_exit_field(const WeightedGraph& g, Vertex x, int R) {
    auto layers = ball_layers(g, x, R);
    if (layers.size() >= static_cast<std::size_t>(g.vertex_count())) {
        throw DomainError("B(" + std::to_string(x) + "," + std::to_string(R) +
                          ") is the whole graph; the walk never exits");
    }
    ExitField field;
    field.center = x;
    field.radius = R;
    field.members.reserve(layers.size());
    for (auto [v, d] : layers) field.members.push_back(v);

    DirichletSystem system(g, field.members);
    Eigen::VectorXd E = system.solve(system.measure());
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(E.size());
    field.residual = system.operator_residual(E, ones);
    if (!std::isfinite(field.residual) || field.residual > 1e-6) {
        throw NumericalError("exit-time solve on B(" + std::to_string(x) + "," + std::to_string(R) + ") failed",
                             field.residual);
    }
    field.values.assign(E.data(), E.data() + E.size());
    return field;
}

McExitResult mc_exit_time(const WeightedGraph& g, Vertex x, int R, long walks, std::uint64_t seed,
                          std::span<const long> tail_grid, long step_cap, int threads) {
    if (walks < 1) throw DomainError("at least one walk is required");
    auto layers = ball_layers(g, x, R);
    if (layers.size() >= static_cast<std::size_t>(g.vertex_count())) {
        throw DomainError("ball covers the whole graph; the walk never exits");
    }
    std::vector<char> inside(g.vertex_count(), 0);
    for (auto [v, d] : layers) inside[v] = 1;

    std::vector<long> exit_step(walks);
    parallel_for(static_cast<std::size_t>(walks), threads, [&](std::size_t i) {
        const auto w = static_cast<std::uint64_t>(i);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(w >> 32)};
        std::mt19937_64 rng(seq);
        Vertex pos = x;
        long t = 0;
        while (t < step_cap) {
            ++t;
            double u = std::generate_canonical<double, 64>(rng) * g.measure(pos);
            auto nb = g.neighbors(pos);
            auto wt = g.neighbor_weights(pos);
            Vertex next = nb.back();
            for (std::size_t k = 0; k < nb.size(); ++k) {
                if (u < wt[k]) {
                    next = nb[k];
                    break;
                }
                u -= wt[k];
            }
            pos = next;
            if (!inside[pos]) break;
        }
        exit_step[i] = inside[pos] ? -t : t;
    });

    McExitResult res;
    res.walks = walks;
    long double sum = 0.0L;
    long double sum_sq = 0.0L;
    for (long t : exit_step) {
        if (t < 0) ++res.censored;
        long double v = static_cast<long double>(std::labs(t));
        sum += v;
        sum_sq += v * v;
    }
    const long double mean = sum / walks;
    res.mean = static_cast<double>(mean);
    if (walks > 1) {
        long double var = (sum_sq - walks * mean * mean) / (walks - 1);
        res.std_error = static_cast<double>(std::sqrt(std::max(var, 0.0L) / walks));
    }
    for (long n : tail_grid) {
        long below = std::count_if(exit_step.begin(), exit_step.end(), [n](long t) { return t > 0 && t < n; });
        res.tail.emplace_back(n, static_cast<double>(below) / walks);
    }
    return res;
}

namespace {

// solved exit times carry a relative error near 1e-12; E = n must count as reached
bool reaches(double E, double n) { return E >= n * (1.0 - kExitTimeSlack); }

}  // namespace

int exit_time_inverse(Workspace& ws, Vertex x, double n) {
    if (!(n > 0.0)) throw DomainError("exit_time_inverse requires n >= 1");
    const int safe = ws.safe_radius(x);
    if (safe < 1) throw TruncationError("vertex " + std::to_string(x) + " has no admissible radius");
    int lo = 0;  // E(x,lo) < n, with E(x,0) = 0
    int hi = 1;
    while (!reaches(ws.exit_time(x, hi), n)) {
        if (hi == safe) {
            throw TruncationError("E(" + std::to_string(x) + ",R) stays below " + format_double(n) +
                                  " up to the safe radius " + std::to_string(safe));
        }
        lo = hi;
        hi = std::min(2 * hi, safe);
    }
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        if (reaches(ws.exit_time(x, mid), n)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

int exit_time_inverse(const WeightedGraph& g, Vertex x, double n) {
    Workspace ws(g);
    return exit_time_inverse(ws, x, n);
}

ScaleFunction::ScaleFunction(std::vector<double> values, std::vector<Vertex> centers)
    : values_(std::move(values)), centers_(std::move(centers)) {
    if (values_.empty()) throw DomainError("scale function needs at least F(1)");
}

double ScaleFunction::operator()(int R) const {
    if (R == 0) return 0.0;
    if (R < 0 || R > max_radius()) {
        throw TruncationError("F(" + std::to_string(R) + ") is outside the tabulated range 1.." +
                              std::to_string(max_radius()));
    }
    return values_[R - 1];
}

int ScaleFunction::inverse(double n) const {
    auto it = std::partition_point(values_.begin(), values_.end(), [n](double F) { return !reaches(F, n); });
    if (it == values_.end()) {
        throw TruncationError("f(" + format_double(n) + ") lies beyond the tabulated F");
    }
    return static_cast<int>(it - values_.begin()) + 1;
}

std::string ScaleFunction::to_csv() const {
    std::ostringstream out;
    out << "R,F(R)\n";
    for (int R = 1; R <= max_radius(); ++R) out << R << "," << format_double(values_[R - 1]) << "\n";
    return out.str();
}

ScaleFunction scale_function(Workspace& ws, std::span<const Vertex> centers, int R_max) {
    if (centers.empty()) throw DomainError("scale function needs a nonempty center sample");
    if (R_max < 1) throw DomainError("R_max must be positive");
    std::vector<double> F(R_max, std::numeric_limits<double>::infinity());
    for (Vertex c : centers) {
        for (int R = 1; R <= R_max; ++R) F[R - 1] = std::min(F[R - 1], ws.exit_time(c, R));
    }
    return ScaleFunction(std::move(F), std::vector<Vertex>(centers.begin(), centers.end()));
}

ScaleFunction scale_function(const WeightedGraph& g, std::span<const Vertex> centers, int R_max) {
    Workspace ws(g);
    return scale_function(ws, centers, R_max);
}

namespace {

/// Scans k from R downwards in blocks of constant floor(R/k); within a block the
/// largest k is the only candidate, since n/k grows as k shrinks.
template <typename Threshold>
int largest_admissible_k(double n, int R, Threshold&& threshold) {
    if (R < 1) throw DomainError("k-function requires R >= 1");
    int k = R;
    while (k >= 1) {
        const int q = R / k;
        if (reaches(threshold(q), n / k)) return k;
        k = R / (q + 1);
    }
    return 0;
}

}  // namespace

int subgaussian_k(const ScaleFunction& F, double n, int R) {
    return largest_admissible_k(n, R, [&](int q) { return F(q); });
}

int local_k(Workspace& ws, double n, Vertex x, int R) {
    return largest_admissible_k(n, R, [&](int q) { return ws.min_exit_time_over_ball(x, R, q); });
}

int local_k(const WeightedGraph& g, double n, Vertex x, int R) {
    Workspace ws(g);
    return local_k(ws, n, x, R);
}

}  // namespace hklab
