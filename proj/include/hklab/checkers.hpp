#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hklab/graph.hpp"
#include "hklab/walk.hpp"
#include "hklab/workspace.hpp"

namespace hklab {

inline constexpr const char* kReportSchema = "hklab-report/1";

/// How to pick centers and radii. Serialised verbatim into every report.
struct GridSpec {
    std::string centers = "auto";        // auto | labels | vertices | random
    std::vector<std::string> labels;
    std::vector<Vertex> vertices;
    int count = 8;                       // random strategy
    int r0 = 1;
    int r_max = 0;                       // 0: limited by the safe radius only
    std::vector<int> times;              // empty: even powers of two up to horizon
    int horizon = 1024;
    int fit_min_radius = 8;              // exponent fits ignore smaller radii
};

nlohmann::json to_json(const GridSpec& spec);
/// Throws DomainError on unknown keys or bad values.
GridSpec grid_spec_from_json(const nlohmann::json& j);

struct Grid {
    std::vector<Vertex> centers;
    std::vector<int> safe;      // safe radius per center
    std::vector<int> radii;     // r0, 2r0, 4r0, ...
    std::vector<int> times;
    int fit_min_radius = 8;

    /// Cell (x, R) is admissible when B(x, 2R) is.
    bool admissible(std::size_t center_index, int R) const { return 2 * R <= safe[center_index]; }
    std::size_t cell_count() const;
    nlohmann::json to_json() const;
};

Grid make_grid(Workspace& ws, const GridSpec& spec, std::uint64_t seed);

struct ExponentFit {
    double exponent = 0.0;
    double r2 = 1.0;
    int points = 0;
};

/// Least-squares slope of log value against log R. Needs three points, two distinct radii
/// and positive values.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> series);
/// Common slope with one intercept per series (several centers at once).
ExponentFit fit_exponent_panel(const std::vector<std::vector<std::pair<double, double>>>& series);

struct Bound {
    std::optional<double> min;
    std::optional<double> max;

    friend bool operator==(const Bound&, const Bound&) = default;
};
/// condition -> metric -> pass band
using Thresholds = std::map<std::string, std::map<std::string, Bound>>;

Thresholds default_thresholds();
nlohmann::json to_json(const Thresholds& t);
/// Entries given in j override the defaults.
Thresholds thresholds_from_json(const nlohmann::json& j);

struct CheckOptions {
    std::uint64_t seed = 1;
    int threads = 1;                   // never recorded: results do not depend on it
    int trials = 100;                  // random boundary data per cell
    int comparison_points = 64;        // y in B(x,R) for C_V / C_T, w on spheres for MVG
    long mc_walks = 2000;
    int pairs = 64;                    // off-diagonal samples per (x, n)
    double c_prime = 2.0;
    double parabolic_budget = 2e9;     // |B|^2 * F(c4 R) per parabolic cell; larger cells are flagged
    std::array<double, 5> profile{1.0, 2.0, 3.0, 4.0, 0.5};
    Thresholds thresholds = default_thresholds();
};

nlohmann::json options_to_json(const CheckOptions& o);
/// Applies the option keys present in j; throws DomainError on unknown keys.
void apply_options(CheckOptions& o, const nlohmann::json& j);

struct CellResult {
    Vertex x = 0;
    int R = 0;
    int n = 0;                                 // time index, 0 when the cell has none
    double value = std::numeric_limits<double>::quiet_NaN();  // NaN for flagged cells
    std::map<std::string, double> extra;
    std::string flag;                          // empty, or why the cell was skipped
};

struct MetricCheck {
    std::string metric;
    Bound bound;
    std::optional<double> value;
    bool pass = false;
};

struct ConditionReport {
    std::string condition;
    nlohmann::json graph_spec;
    Grid grid;
    nlohmann::json config;
    std::vector<CellResult> cells;
    double max = 0.0;
    double min = 0.0;
    double spread = 0.0;
    std::optional<ExponentFit> exponent;
    std::map<std::string, double> metrics;
    std::vector<MetricCheck> checks;
    bool pass = false;

    std::optional<double> metric(const std::string& name) const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

ConditionReport check_volume_doubling(Workspace& ws, const Grid& grid, const CheckOptions& opt);
ConditionReport check_time_conditions(Workspace& ws, const Grid& grid, const CheckOptions& opt);
ConditionReport check_uniform_exit(Workspace& ws, const Grid& grid, const CheckOptions& opt);
ConditionReport check_einstein(Workspace& ws, const Grid& grid, const CheckOptions& opt);
ConditionReport check_mean_value(Workspace& ws, const Grid& grid, const CheckOptions& opt);

enum class HarnackMode { elliptic, parabolic };
ConditionReport check_harnack(Workspace& ws, const Grid& grid, HarnackMode mode, const CheckOptions& opt);

ConditionReport check_kernel_bounds(Workspace& ws, const Grid& grid, const CheckOptions& opt);
ConditionReport check_green_bounds(Workspace& ws, const Grid& grid, const CheckOptions& opt);

/// volume_doubling, time_conditions, uniform_exit, einstein, mean_value, harnack_elliptic,
/// harnack_parabolic, kernel_bounds, green_bounds
const std::vector<std::string>& checker_names();
ConditionReport run_checker(const std::string& name, Workspace& ws, const Grid& grid, const CheckOptions& opt);

/// u(x) V(x,R) / sum_{B(x,R)} u mu for the harmonic extension of data on the boundary of B(x,R).
double mean_value_ratio(const WeightedGraph& g, Vertex x, int R, std::span<const double> boundary_data);
/// max_{B(x,R)} u / min_{B(x,R)} u for the harmonic extension to B(x,2R) of the given data.
double harnack_ratio(const WeightedGraph& g, Vertex x, int R, std::span<const double> boundary_data);

/// F(r) = min E(x,r) over the centers whose safe radius admits r, for r = 1..max safe radius
/// (or r_limit when positive). Tabulation may stop early once F reaches stop_at.
ScaleFunction grid_scale_function(Workspace& ws, const Grid& grid, int r_limit = 0,
                                  double stop_at = std::numeric_limits<double>::infinity(), int threads = 1);

}  // namespace hklab
