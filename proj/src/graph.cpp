#include "hklab/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "hklab/errors.hpp"

namespace hklab {

namespace {

std::vector<int> multi_source_bfs(Vertex n, const std::vector<std::size_t>& offsets,
                                  const std::vector<Vertex>& adj, std::span<const Vertex> sources) {
    std::vector<int> dist(n, kUnreached);
    std::deque<Vertex> queue;
    for (Vertex s : sources) {
        if (dist[s] == kUnreached) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        Vertex u = queue.front();
        queue.pop_front();
        for (std::size_t k = offsets[u]; k < offsets[u + 1]; ++k) {
            Vertex v = adj[k];
            if (dist[v] == kUnreached) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

}  // namespace

WeightedGraph::WeightedGraph(Vertex vertex_count, std::vector<Edge> edges,
                             std::map<std::string, Vertex> labels, std::vector<Vertex> frontier)
    : n_(vertex_count), edges_(std::move(edges)), labels_(std::move(labels)), frontier_(std::move(frontier)) {
    if (n_ <= 0) throw DomainError("graph must have at least one vertex");

    std::set<std::pair<Vertex, Vertex>> seen;
    std::vector<std::size_t> degree(n_, 0);
    for (const Edge& e : edges_) {
        if (!contains(e.u) || !contains(e.v)) throw DomainError("edge endpoint out of range");
        if (e.u == e.v) throw DomainError("self-loop at vertex " + std::to_string(e.u));
        if (!(e.weight > 0.0)) throw DomainError("edge weights must be strictly positive");
        if (!seen.insert(std::minmax(e.u, e.v)).second) {
            throw DomainError("duplicate edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
        }
        ++degree[e.u];
        ++degree[e.v];
    }

    offsets_.assign(n_ + 1, 0);
    for (Vertex x = 0; x < n_; ++x) offsets_[x + 1] = offsets_[x] + degree[x];
    adj_.resize(offsets_[n_]);
    adj_w_.resize(offsets_[n_]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges_) {
        adj_[fill[e.u]] = e.v;
        adj_w_[fill[e.u]++] = e.weight;
        adj_[fill[e.v]] = e.u;
        adj_w_[fill[e.v]++] = e.weight;
    }

    measure_.assign(n_, 0.0);
    for (Vertex x = 0; x < n_; ++x) {
        for (std::size_t k = offsets_[x]; k < offsets_[x + 1]; ++k) measure_[x] += adj_w_[k];
        total_measure_ += measure_[x];
    }

    if (n_ > 1) {
        const Vertex origin = 0;
        auto reach = multi_source_bfs(n_, offsets_, adj_, std::span<const Vertex>(&origin, 1));
        if (std::find(reach.begin(), reach.end(), kUnreached) != reach.end()) {
            throw DomainError("graph is not connected");
        }
    }

    for (const auto& [name, v] : labels_) {
        if (!contains(v)) throw DomainError("label '" + name + "' refers to a missing vertex");
    }
    std::sort(frontier_.begin(), frontier_.end());
    frontier_.erase(std::unique(frontier_.begin(), frontier_.end()), frontier_.end());
    for (Vertex f : frontier_) {
        if (!contains(f)) throw DomainError("frontier vertex out of range");
    }
    if (!frontier_.empty()) frontier_dist_ = multi_source_bfs(n_, offsets_, adj_, frontier_);
}

double WeightedGraph::weight(Vertex x, Vertex y) const {
    auto nb = neighbors(x);
    auto w = neighbor_weights(x);
    for (std::size_t k = 0; k < nb.size(); ++k) {
        if (nb[k] == y) return w[k];
    }
    return 0.0;
}

Vertex WeightedGraph::label(std::string_view name) const {
    auto it = labels_.find(std::string(name));
    if (it == labels_.end()) throw DomainError("unknown label '" + std::string(name) + "'");
    return it->second;
}

bool WeightedGraph::has_label(std::string_view name) const { return labels_.count(std::string(name)) > 0; }

void WeightedGraph::require_vertex(Vertex x) const {
    if (!contains(x)) throw DomainError("unknown vertex " + std::to_string(x));
}

WeightedGraph WeightedGraph::without_frontier() const { return WeightedGraph(n_, edges_, labels_, {}); }

WeightedGraph WeightedGraph::scaled(double s) const {
    if (!(s > 0.0)) throw DomainError("scale factor must be positive");
    std::vector<Edge> e = edges_;
    for (Edge& edge : e) edge.weight *= s;
    return WeightedGraph(n_, std::move(e), labels_, frontier_);
}

VertexSet::VertexSet(const WeightedGraph& g, std::vector<Vertex> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (Vertex v : members_) {
        g.require_vertex(v);
        measure_ += g.measure(v);
    }
}

bool VertexSet::contains(Vertex x) const { return std::binary_search(members_.begin(), members_.end(), x); }

DistanceField distance_field(const WeightedGraph& g, Vertex x, int max_radius) {
    g.require_vertex(x);
    DistanceField field;
    field.source = x;
    field.dist.assign(g.vertex_count(), kUnreached);
    field.dist[x] = 0;
    field.order.push_back(x);
    int reached = 0;
    for (std::size_t head = 0; head < field.order.size(); ++head) {
        Vertex u = field.order[head];
        int du = field.dist[u];
        reached = std::max(reached, du);
        if (max_radius >= 0 && du >= max_radius) continue;
        for (Vertex v : g.neighbors(u)) {
            if (field.dist[v] == kUnreached) {
                field.dist[v] = du + 1;
                field.order.push_back(v);
            }
        }
    }
    field.computed_radius = max_radius >= 0 ? max_radius : reached;
    return field;
}

std::vector<std::pair<Vertex, int>> ball_layers(const WeightedGraph& g, Vertex x, int R) {
    g.require_vertex(x);
    if (R < 1) throw DomainError("ball radius must be at least 1");
    if (R > g.frontier_distance(x)) {
        std::ostringstream msg;
        msg << "B(" << x << "," << R << ") reaches the truncation frontier (safe radius "
            << g.frontier_distance(x) << ")";
        throw TruncationError(msg.str());
    }
    // Stamped scratch keeps repeated small-ball scans proportional to the ball size.
    thread_local std::vector<std::uint32_t> stamp;
    thread_local std::uint32_t epoch = 0;
    if (stamp.size() < static_cast<std::size_t>(g.vertex_count())) {
        stamp.assign(g.vertex_count(), 0);
        epoch = 0;
    }
    if (++epoch == 0) {
        std::fill(stamp.begin(), stamp.end(), 0);
        epoch = 1;
    }
    std::vector<std::pair<Vertex, int>> out;
    out.emplace_back(x, 0);
    stamp[x] = epoch;
    for (std::size_t head = 0; head < out.size(); ++head) {
        auto [u, du] = out[head];
        if (du + 1 >= R) continue;
        for (Vertex v : g.neighbors(u)) {
            if (stamp[v] != epoch) {
                stamp[v] = epoch;
                out.emplace_back(v, du + 1);
            }
        }
    }
    return out;
}

VertexSet ball(const WeightedGraph& g, Vertex x, int R) {
    auto layers = ball_layers(g, x, R);
    std::vector<Vertex> members;
    members.reserve(layers.size());
    for (auto [v, d] : layers) members.push_back(v);
    return VertexSet(g, std::move(members));
}

double volume(const WeightedGraph& g, Vertex x, int R) {
    double v = 0.0;
    for (auto [y, d] : ball_layers(g, x, R)) v += g.measure(y);
    return v;
}

double annulus_volume(const WeightedGraph& g, Vertex x, int r, int R) {
    if (r < 0 || r > R) throw DomainError("annulus requires 0 <= r <= R");
    if (r == R) {
        g.require_vertex(x);
        return 0.0;
    }
    double inner = 0.0;
    double outer = 0.0;
    for (auto [y, d] : ball_layers(g, x, R)) {
        outer += g.measure(y);
        if (d < r) inner += g.measure(y);
    }
    return outer - inner;
}

Boundary boundary(const WeightedGraph& g, const VertexSet& A) {
    if (A.empty()) throw DomainError("boundary of an empty set");
    std::vector<Vertex> outer;
    for (Vertex x : A.members()) {
        for (Vertex y : g.neighbors(x)) {
            if (!A.contains(y)) outer.push_back(y);
        }
    }
    Boundary b;
    b.outer = VertexSet(g, outer);
    std::vector<Vertex> closure(A.members().begin(), A.members().end());
    closure.insert(closure.end(), b.outer.members().begin(), b.outer.members().end());
    b.closure = VertexSet(g, std::move(closure));
    b.covers_graph = A.size() == static_cast<std::size_t>(g.vertex_count());
    return b;
}

double p0_constant(const WeightedGraph& g) {
    double p0 = 1.0;
    for (const Edge& e : g.edges()) {
        p0 = std::min({p0, e.weight / g.measure(e.u), e.weight / g.measure(e.v)});
    }
    return p0;
}

int safe_radius(const WeightedGraph& g, Vertex x) {
    g.require_vertex(x);
    if (!g.frontier().empty()) return g.frontier_distance(x);
    return distance_field(g, x).computed_radius;
}

}  // namespace hklab
