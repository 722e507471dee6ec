#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hklab {

using Vertex = std::int32_t;

inline constexpr int kUnreached = -1;
inline constexpr int kNoFrontier = std::numeric_limits<int>::max();

struct Edge {
    Vertex u;
    Vertex v;
    double weight;
};

/**
 * Immutable weighted graph: symmetric positive edge weights mu_xy, derived vertex
 * measure mu(x) = sum_y mu_xy and the reversible walk P(x,y) = mu_xy / mu(x).
 *
 * Generated graphs are finite truncations of infinite ones. The truncation frontier
 * lists the vertices whose neighbourhood differs from the infinite graph; any ball
 * that would contain a frontier vertex is rejected with TruncationError.
 */
class WeightedGraph {
public:
    WeightedGraph(Vertex vertex_count, std::vector<Edge> edges,
                  std::map<std::string, Vertex> labels = {},
                  std::vector<Vertex> frontier = {});

    Vertex vertex_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }

    std::span<const Vertex> neighbors(Vertex x) const {
        return {adj_.data() + offsets_[x], adj_.data() + offsets_[x + 1]};
    }
    std::span<const double> neighbor_weights(Vertex x) const {
        return {adj_w_.data() + offsets_[x], adj_w_.data() + offsets_[x + 1]};
    }
    std::size_t degree(Vertex x) const { return offsets_[x + 1] - offsets_[x]; }

    double measure(Vertex x) const { return measure_[x]; }
    std::span<const double> measures() const noexcept { return measure_; }
    double total_measure() const noexcept { return total_measure_; }

    /// Weight of the edge x~y, zero if absent.
    double weight(Vertex x, Vertex y) const;

    const std::map<std::string, Vertex>& labels() const noexcept { return labels_; }
    /// Throws DomainError for unknown names.
    Vertex label(std::string_view name) const;
    bool has_label(std::string_view name) const;

    std::span<const Vertex> frontier() const noexcept { return frontier_; }
    /// d(x, frontier), or kNoFrontier when the graph is complete.
    int frontier_distance(Vertex x) const { return frontier_.empty() ? kNoFrontier : frontier_dist_[x]; }

    bool contains(Vertex x) const noexcept { return x >= 0 && x < n_; }
    /// Throws DomainError when x is not a vertex.
    void require_vertex(Vertex x) const;

    /// Same graph read as a finite graph in its own right (no truncation frontier).
    WeightedGraph without_frontier() const;
    /// All weights multiplied by s > 0.
    WeightedGraph scaled(double s) const;

private:
    Vertex n_;
    std::vector<Edge> edges_;
    std::map<std::string, Vertex> labels_;
    std::vector<Vertex> frontier_;
    std::vector<int> frontier_dist_;
    std::vector<std::size_t> offsets_;
    std::vector<Vertex> adj_;
    std::vector<double> adj_w_;
    std::vector<double> measure_;
    double total_measure_ = 0.0;
};

/// Sorted set of vertices with its cached measure mu(A).
class VertexSet {
public:
    VertexSet() = default;
    VertexSet(const WeightedGraph& g, std::vector<Vertex> members);

    std::span<const Vertex> members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    bool contains(Vertex x) const;
    double measure() const noexcept { return measure_; }

    friend bool operator==(const VertexSet& a, const VertexSet& b) { return a.members_ == b.members_; }

private:
    std::vector<Vertex> members_;
    double measure_ = 0.0;
};

/// BFS distances from one source, explored up to `computed_radius` inclusive.
struct DistanceField {
    Vertex source = 0;
    std::vector<int> dist;       // kUnreached beyond computed_radius
    std::vector<Vertex> order;   // BFS order, distances nondecreasing
    int computed_radius = 0;

    int at(Vertex v) const { return dist[v]; }
};

/// BFS from x over vertices with d(x,.) <= max_radius (whole component when negative).
DistanceField distance_field(const WeightedGraph& g, Vertex x, int max_radius = -1);

/// Open ball B(x,R) = {y : d(x,y) < R}.
VertexSet ball(const WeightedGraph& g, Vertex x, int R);
/// Members of B(x,R) in BFS order together with their distances from x.
std::vector<std::pair<Vertex, int>> ball_layers(const WeightedGraph& g, Vertex x, int R);

/// V(x,R) = mu(B(x,R)).
double volume(const WeightedGraph& g, Vertex x, int R);
/// v(x,r,R) = V(x,R) - V(x,r).
double annulus_volume(const WeightedGraph& g, Vertex x, int r, int R);

struct Boundary {
    VertexSet outer;       // external boundary dA
    VertexSet closure;     // A union dA
    bool covers_graph = false;  // A is the whole vertex set; outer is then empty
};

Boundary boundary(const WeightedGraph& g, const VertexSet& A);

/// min over edges of mu_xy / mu(x) in both orientations.
double p0_constant(const WeightedGraph& g);

/// Largest R for which B(x,R) is a proper ball clear of the truncation frontier.
int safe_radius(const WeightedGraph& g, Vertex x);

}  // namespace hklab
