#include "hklab/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "hklab/errors.hpp"

namespace hklab {

namespace {

long long ipow(long long base, int exp) {
    long long r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

void require_cap(long double count, std::size_t cap, const std::string& what) {
    if (count > static_cast<long double>(cap)) {
        throw CapExceededError(what + " would have " + std::to_string(static_cast<long long>(count)) +
                               " vertices, above the cap of " + std::to_string(cap));
    }
}

/// Assigns dense ids to lattice points in order of first appearance.
class PointIndex {
public:
    Vertex id(std::array<int, 3> p) {
        auto [it, inserted] = ids_.try_emplace(p, static_cast<Vertex>(ids_.size()));
        return it->second;
    }
    Vertex find(std::array<int, 3> p) const { return ids_.at(p); }
    Vertex size() const { return static_cast<Vertex>(ids_.size()); }

private:
    std::map<std::array<int, 3>, Vertex> ids_;
};

struct Segment {
    std::array<int, 2> a;
    std::array<int, 2> b;
};

void vicsek_segments(int cx, int cy, int level, std::vector<Segment>& out) {
    if (level == 0) {
        out.push_back({{cx, cy}, {cx + 1, cy}});
        out.push_back({{cx, cy}, {cx, cy + 1}});
        out.push_back({{cx, cy}, {cx - 1, cy}});
        out.push_back({{cx, cy}, {cx, cy - 1}});
        return;
    }
    int shift = static_cast<int>(2 * ipow(3, level - 1));
    vicsek_segments(cx, cy, level - 1, out);
    vicsek_segments(cx + shift, cy, level - 1, out);
    vicsek_segments(cx, cy + shift, level - 1, out);
    vicsek_segments(cx - shift, cy, level - 1, out);
    vicsek_segments(cx, cy - shift, level - 1, out);
}

struct VicsekLayout {
    std::vector<Edge> edges;
    std::vector<std::array<int, 2>> coords;
    Vertex n = 0;
};

VicsekLayout vicsek_layout(int level) {
    std::vector<Segment> segs;
    segs.reserve(4 * ipow(5, level));
    vicsek_segments(0, 0, level, segs);
    PointIndex index;
    VicsekLayout lay;
    for (const Segment& s : segs) {
        Vertex u = index.id({s.a[0], s.a[1], 0});
        Vertex v = index.id({s.b[0], s.b[1], 0});
        lay.edges.push_back({u, v, 1.0});
        if (static_cast<std::size_t>(std::max(u, v)) >= lay.coords.size()) lay.coords.resize(std::max(u, v) + 1);
        lay.coords[u] = s.a;
        lay.coords[v] = s.b;
    }
    lay.n = index.size();
    return lay;
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::lattice: return "lattice";
        case Family::gasket: return "gasket";
        case Family::vicsek: return "vicsek";
        case Family::stretched_vicsek: return "stretched_vicsek";
        case Family::weighted_vicsek: return "weighted_vicsek";
    }
    throw DomainError("unknown family");
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::lattice, Family::gasket, Family::vicsek, Family::stretched_vicsek,
                     Family::weighted_vicsek}) {
        if (family_name(f) == name) return f;
    }
    throw DomainError("unknown generator family '" + name + "'");
}

nlohmann::json to_json(const GeneratorSpec& spec) {
    nlohmann::json j;
    j["family"] = family_name(spec.family);
    if (spec.family == Family::lattice) {
        j["dim"] = spec.dim;
        j["halfwidth"] = spec.halfwidth;
    } else {
        j["level"] = spec.level;
    }
    if (spec.family == Family::weighted_vicsek) j["q"] = spec.q;
    return j;
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
    GeneratorSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.level = j.value("level", spec.level);
    spec.dim = j.value("dim", spec.dim);
    spec.halfwidth = j.value("halfwidth", spec.halfwidth);
    spec.q = j.value("q", spec.q);
    spec.vertex_cap = j.value("vertex_cap", spec.vertex_cap);
    return spec;
}

WeightedGraph generate(const GeneratorSpec& spec) {
    switch (spec.family) {
        case Family::lattice: return lattice_zd(spec.dim, spec.halfwidth, spec.vertex_cap);
        case Family::gasket: return sierpinski_gasket(spec.level, spec.vertex_cap);
        case Family::vicsek: return vicsek_tree(spec.level, spec.vertex_cap);
        case Family::stretched_vicsek: return stretched_vicsek(spec.level, spec.vertex_cap);
        case Family::weighted_vicsek: return weighted_vicsek(spec.level, spec.q, spec.vertex_cap);
    }
    throw DomainError("unknown family");
}

WeightedGraph lattice_zd(int dim, int halfwidth, std::size_t vertex_cap) {
    if (dim < 1 || dim > 3) throw DomainError("lattice dimension must be 1, 2 or 3");
    if (halfwidth < 1) throw DomainError("lattice halfwidth must be positive");
    const long long side = 2LL * halfwidth + 1;
    require_cap(std::pow(static_cast<long double>(side), dim), vertex_cap, "lattice");

    const Vertex n = static_cast<Vertex>(ipow(side, dim));
    auto coord = [&](Vertex id, int axis) {
        long long stride = ipow(side, axis);
        return static_cast<int>((id / stride) % side) - halfwidth;
    };
    std::vector<Edge> edges;
    std::vector<Vertex> frontier;
    for (Vertex x = 0; x < n; ++x) {
        bool on_face = false;
        for (int axis = 0; axis < dim; ++axis) {
            int c = coord(x, axis);
            if (std::abs(c) == halfwidth) on_face = true;
            if (c < halfwidth) edges.push_back({x, static_cast<Vertex>(x + ipow(side, axis)), 1.0});
        }
        if (on_face) frontier.push_back(x);
    }
    Vertex center = 0;
    for (int axis = 0; axis < dim; ++axis) center += static_cast<Vertex>(halfwidth * ipow(side, axis));
    return WeightedGraph(n, std::move(edges), {{"center", center}}, std::move(frontier));
}

WeightedGraph sierpinski_gasket(int level, std::size_t vertex_cap) {
    if (level < 0) throw DomainError("gasket level must be nonnegative");
    require_cap(3.0L * (std::pow(3.0L, level) + 1) / 2, vertex_cap, "gasket");

    // Unit up-triangles of the level-n gasket in triangular-lattice coordinates.
    std::vector<std::array<int, 2>> origins{{0, 0}};
    for (int k = 0; k < level; ++k) {
        int side = static_cast<int>(ipow(2, k));
        std::vector<std::array<int, 2>> next;
        next.reserve(origins.size() * 3);
        for (auto [dx, dy] : std::array<std::array<int, 2>, 3>{{{0, 0}, {side, 0}, {0, side}}}) {
            for (auto [a, b] : origins) next.push_back({a + dx, b + dy});
        }
        origins = std::move(next);
    }
    PointIndex index;
    std::vector<Edge> edges;
    edges.reserve(origins.size() * 3);
    for (auto [a, b] : origins) {
        Vertex p = index.id({a, b, 0});
        Vertex q = index.id({a + 1, b, 0});
        Vertex r = index.id({a, b + 1, 0});
        edges.push_back({p, q, 1.0});
        edges.push_back({q, r, 1.0});
        edges.push_back({r, p, 1.0});
    }
    const int side = static_cast<int>(ipow(2, level));
    Vertex c0 = index.find({0, 0, 0});
    Vertex c1 = index.find({side, 0, 0});
    Vertex c2 = index.find({0, side, 0});
    return WeightedGraph(index.size(), std::move(edges), {{"c0", c0}, {"c1", c1}, {"c2", c2}}, {c1, c2});
}

namespace {

std::map<std::string, Vertex> vicsek_labels(const VicsekLayout& lay, int level) {
    const int reach = static_cast<int>(ipow(3, level));
    std::map<std::string, Vertex> labels;
    const std::array<std::array<int, 2>, 5> marks{{{0, 0}, {reach, 0}, {0, reach}, {-reach, 0}, {0, -reach}}};
    const std::array<const char*, 5> names{"z0", "e0", "e1", "e2", "e3"};
    for (Vertex v = 0; v < lay.n; ++v) {
        for (std::size_t k = 0; k < marks.size(); ++k) {
            if (lay.coords[v] == marks[k]) labels[names[k]] = v;
        }
    }
    return labels;
}

}  // namespace

WeightedGraph vicsek_tree(int level, std::size_t vertex_cap) {
    if (level < 0) throw DomainError("vicsek level must be nonnegative");
    require_cap(4.0L * std::pow(5.0L, level) + 1, vertex_cap, "vicsek tree");
    VicsekLayout lay = vicsek_layout(level);
    auto labels = vicsek_labels(lay, level);
    std::vector<Vertex> frontier{labels.at("e0"), labels.at("e1"), labels.at("e2"), labels.at("e3")};
    return WeightedGraph(lay.n, std::move(lay.edges), std::move(labels), std::move(frontier));
}

std::vector<int> vicsek_annulus_index(const WeightedGraph& tree, int level) {
    // The central block T_i is the part of the tree within graph distance 3^i of the centre.
    auto from_center = distance_field(tree, tree.label("z0"));
    std::vector<int> annulus;
    annulus.reserve(tree.edge_count());
    for (const Edge& e : tree.edges()) {
        int far = std::max(from_center.at(e.u), from_center.at(e.v));
        int i = 0;
        while (ipow(3, i) < far) ++i;
        annulus.push_back(std::min(i, level));
    }
    return annulus;
}

WeightedGraph stretched_vicsek(int level, std::size_t vertex_cap) {
    if (level < 1) throw DomainError("stretched vicsek level must be at least 1");
    require_cap(4.0L * std::pow(5.0L, level) * (level + 1) + 1, vertex_cap, "stretched vicsek tree");

    WeightedGraph tree = vicsek_tree(level, vertex_cap);
    const Vertex root = tree.label("e2");
    const Vertex far_end = tree.label("e0");
    auto from_root = distance_field(tree, root);

    // G_i is the closed ball of radius D_i = 2*3^i around the root.
    auto block_of = [&](const Edge& e) {
        int far = std::max(from_root.at(e.u), from_root.at(e.v));
        int i = 0;
        while (2 * ipow(3, i) < far) ++i;
        return i;
    };

    std::vector<Edge> edges;
    Vertex next = tree.vertex_count();
    for (const Edge& e : tree.edges()) {
        int i = block_of(e);
        Vertex prev = e.u;
        for (int k = 0; k < i; ++k) {
            edges.push_back({prev, next, 1.0});
            prev = next++;
        }
        edges.push_back({prev, e.v, 1.0});
    }

    std::map<std::string, Vertex> labels{{"z0", root}, {"center", tree.label("z0")}};
    // Cut vertices lie on the root -> e0 path at original distance D_i.
    std::vector<Vertex> path{far_end};
    while (path.back() != root) {
        Vertex v = path.back();
        for (Vertex u : tree.neighbors(v)) {
            if (from_root.at(u) == from_root.at(v) - 1) {
                path.push_back(u);
                break;
            }
        }
    }
    for (int i = 1; i <= level; ++i) {
        const int target = static_cast<int>(2 * ipow(3, i));
        for (Vertex v : path) {
            if (from_root.at(v) == target) labels["z" + std::to_string(i)] = v;
        }
    }
    const Vertex frontier = labels.at("z" + std::to_string(level));
    return WeightedGraph(next, std::move(edges), std::move(labels), {frontier});
}

WeightedGraph weighted_vicsek(int level, const WeightRule& rule, std::size_t vertex_cap) {
    WeightedGraph tree = vicsek_tree(level, vertex_cap);
    auto annulus = vicsek_annulus_index(tree, level);
    std::vector<Edge> edges(tree.edges().begin(), tree.edges().end());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        double w = rule(annulus[k]);
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw DomainError("weight rule must be positive on annulus " + std::to_string(annulus[k]));
        }
        edges[k].weight = w;
    }
    return WeightedGraph(tree.vertex_count(), std::move(edges), tree.labels(),
                         std::vector<Vertex>(tree.frontier().begin(), tree.frontier().end()));
}

WeightedGraph weighted_vicsek(int level, double q, std::size_t vertex_cap) {
    if (!(q > 0.0)) throw DomainError("weight ratio q must be positive");
    return weighted_vicsek(level, [q](int i) { return std::pow(q, i); }, vertex_cap);
}

}  // namespace hklab
