#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hklab/graph.hpp"

namespace hklab {

class Workspace;

enum class HeatMode { free, killed };

/// Entry cap (rows x vertices) for a fully stored heat profile.
inline constexpr std::size_t kHeatProfileEntryCap = 50'000'000;

/// Evolves the law of X_k from X_0 = source one step at a time: row_{k+1} = row_k P (or P^B).
class HeatStepper {
public:
    HeatStepper(const WeightedGraph& g, Vertex source);
    HeatStepper(const WeightedGraph& g, Vertex source, const VertexSet& killed_on);

    void step();
    int time() const noexcept { return time_; }
    /// P_k(source, y) for all y.
    std::span<const double> distribution() const noexcept { return current_; }
    double kernel(Vertex y) const { return current_[y] / g_->measure(y); }

private:
    const WeightedGraph* g_;
    std::vector<double> current_;
    std::vector<double> scratch_;
    std::vector<char> alive_;
    int time_ = 0;
};

struct HeatProfile {
    Vertex source = 0;
    int horizon = 0;
    HeatMode mode = HeatMode::free;
    std::optional<VertexSet> killed_on;
    std::vector<std::vector<double>> rows;  // rows[k][y] = P_k(source, y)
    std::vector<double> measure;

    double probability(int k, Vertex y) const { return rows.at(k).at(y); }
    /// p_k(source, y) = P_k(source, y) / mu(y).
    double kernel(int k, Vertex y) const { return rows.at(k).at(y) / measure.at(y); }
    double mass(int k) const;
};

HeatProfile heat_profile(const WeightedGraph& g, Vertex x, int n_max,
                         std::size_t entry_cap = kHeatProfileEntryCap);
HeatProfile heat_profile(const WeightedGraph& g, Vertex x, int n_max, const VertexSet& killed_on,
                         std::size_t entry_cap = kHeatProfileEntryCap);

/// Mean exit times E_z(x,R) of the ball B = B(x,R), solved from (I - P^B) E = 1.
struct ExitField {
    Vertex center = 0;
    int radius = 0;
    std::vector<Vertex> members;    // ball vertices in BFS order
    std::vector<double> values;     // E_z for members[i]
    double residual = 0.0;          // max |(I - P^B)E - 1|

    /// E(x,R)
    double at_center() const { return values.front(); }
    /// Ebar(x,R) = max_z E_z
    double maximum() const;
    /// E_z, zero outside the ball.
    double at(Vertex z) const;
};

ExitField mean_exit_field(const WeightedGraph& g, Vertex x, int R);

struct McExitResult {
    double mean = 0.0;
    double std_error = 0.0;
    long walks = 0;
    long censored = 0;                          // walks stopped by the step cap
    std::vector<std::pair<long, double>> tail;  // (n, empirical P(T < n))
};

/// Monte Carlo exit times; walk i draws from a generator keyed by (seed, i).
McExitResult mc_exit_time(const WeightedGraph& g, Vertex x, int R, long walks, std::uint64_t seed,
                          std::span<const long> tail_grid = {}, long step_cap = 50'000'000, int threads = 1);

/// Relative slack when comparing solved exit times against a target n.
inline constexpr double kExitTimeSlack = 1e-10;

/// e(x,n) = min{R : E(x,R) >= n}.
int exit_time_inverse(const WeightedGraph& g, Vertex x, double n);
int exit_time_inverse(Workspace& ws, Vertex x, double n);

/// Tabulated F(R) = min over a center sample of E(x,R), R = 1..max_radius().
class ScaleFunction {
public:
    explicit ScaleFunction(std::vector<double> values, std::vector<Vertex> centers = {});

    int max_radius() const noexcept { return static_cast<int>(values_.size()); }
    /// F(R); F(0) = 0.
    double operator()(int R) const;
    /// f(n) = min{R >= 1 : F(R) >= n}.
    int inverse(double n) const;
    std::span<const double> values() const noexcept { return values_; }
    std::span<const Vertex> centers() const noexcept { return centers_; }
    /// CSV with header `R,F(R)`.
    std::string to_csv() const;

private:
    std::vector<double> values_;
    std::vector<Vertex> centers_;
};

ScaleFunction scale_function(const WeightedGraph& g, std::span<const Vertex> centers, int R_max);
ScaleFunction scale_function(Workspace& ws, std::span<const Vertex> centers, int R_max);

/// Maximal k >= 1 with n/k <= F(floor(R/k)), or 0.
int subgaussian_k(const ScaleFunction& F, double n, int R);

/// Maximal k >= 1 with n/k <= min_{y in B(x,R)} E(y, floor(R/k)), or 0.
int local_k(const WeightedGraph& g, double n, Vertex x, int R);
int local_k(Workspace& ws, double n, Vertex x, int R);

}  // namespace hklab
