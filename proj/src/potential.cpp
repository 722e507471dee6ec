#include "hklab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hklab/errors.hpp"

namespace hklab {

double dirichlet_energy(const WeightedGraph& g, std::span<const double> f) {
    if (f.size() != static_cast<std::size_t>(g.vertex_count())) {
        throw DomainError("energy needs f on every vertex");
    }
    double e = 0.0;
    for (const Edge& edge : g.edges()) {
        double d = f[edge.u] - f[edge.v];
        e += edge.weight * d * d;
    }
    return e;
}

double DirichletProblem::at(Vertex v) const {
    auto it = std::lower_bound(closure.begin(), closure.end(), v);
    if (it == closure.end() || *it != v) throw DomainError("vertex outside the closure of the domain");
    return values[it - closure.begin()];
}

DirichletProblem harmonic_extension(const WeightedGraph& g, const VertexSet& A, std::span<const double> boundary_data) {
    Boundary b = boundary(g, A);
    if (b.covers_graph) throw DomainError("harmonic extension needs a proper domain");
    if (boundary_data.size() != b.outer.size()) {
        throw DomainError("boundary data must cover every vertex of the external boundary");
    }
    for (double h : boundary_data) {
        if (!(h >= 0.0) || !std::isfinite(h)) throw DomainError("boundary data must be finite and nonnegative");
    }

    std::vector<double> h_full(g.vertex_count(), 0.0);
    for (std::size_t i = 0; i < b.outer.size(); ++i) h_full[b.outer.members()[i]] = boundary_data[i];

    DirichletSystem system(g, A.members());
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(A.size()));
    for (std::size_t i = 0; i < A.size(); ++i) {
        Vertex x = A.members()[i];
        double acc = 0.0;
        auto nb = g.neighbors(x);
        auto w = g.neighbor_weights(x);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (system.local_index(nb[k]) < 0) acc += w[k] * h_full[nb[k]];
        }
        rhs[static_cast<Eigen::Index>(i)] = acc;
    }
    Eigen::VectorXd u = system.solve(rhs);

    std::vector<double> full = h_full;
    for (std::size_t i = 0; i < A.size(); ++i) full[A.members()[i]] = u[static_cast<Eigen::Index>(i)];

    DirichletProblem p;
    p.domain = A;
    p.boundary = b.outer;
    p.closure.assign(b.closure.members().begin(), b.closure.members().end());
    for (Vertex v : p.closure) p.values.push_back(full[v]);

    const auto [hmin, hmax] = std::minmax_element(boundary_data.begin(), boundary_data.end());
    const double slack = 1e-12 * std::max(1.0, std::abs(*hmax));
    for (Vertex x : A.members()) {
        double pu = 0.0;
        auto nb = g.neighbors(x);
        auto w = g.neighbor_weights(x);
        for (std::size_t k = 0; k < nb.size(); ++k) pu += w[k] * full[nb[k]];
        pu /= g.measure(x);
        p.residual = std::max(p.residual, std::abs(pu - full[x]));
        if (full[x] < *hmin - slack || full[x] > *hmax + slack) p.maximum_principle = false;
    }
    return p;
}

DirichletProblem harmonic_extension(const WeightedGraph& g, const VertexSet& A,
                                    const std::function<double(Vertex)>& boundary_data) {
    Boundary b = boundary(g, A);
    std::vector<double> data;
    data.reserve(b.outer.size());
    for (Vertex v : b.outer.members()) data.push_back(boundary_data(v));
    return harmonic_extension(g, A, data);
}

namespace {

/// Potential 1 on `one`, 0 off `one` and `free`, harmonic on `free`; returns its energy.
double capacitor_energy(const WeightedGraph& g, const std::vector<char>& role, std::span<const Vertex> free,
                        std::span<const Vertex> touched) {
    // role: 0 = grounded, 1 = held at one, 2 = free
    std::vector<double> f(g.vertex_count(), 0.0);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (role[v] == 1) f[v] = 1.0;
    }
    if (!free.empty()) {
        DirichletSystem system(g, free);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free.size()));
        for (std::size_t i = 0; i < free.size(); ++i) {
            auto nb = g.neighbors(free[i]);
            auto w = g.neighbor_weights(free[i]);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                if (role[nb[k]] == 1) rhs[static_cast<Eigen::Index>(i)] += w[k];
            }
        }
        Eigen::VectorXd u = system.solve(rhs);
        for (std::size_t i = 0; i < free.size(); ++i) f[free[i]] = u[static_cast<Eigen::Index>(i)];
    }
    // Every edge with a nonzero difference has an endpoint in `touched`.
    double energy = 0.0;
    for (Vertex u : touched) {
        auto nb = g.neighbors(u);
        auto w = g.neighbor_weights(u);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            double d = f[u] - f[nb[k]];
            energy += (role[nb[k]] == 0 ? 1.0 : 0.5) * w[k] * d * d;
        }
    }
    return energy;
}

}  // namespace

double effective_resistance(const WeightedGraph& g, const VertexSet& A, const VertexSet& B) {
    if (A.empty() || B.empty()) throw DomainError("resistance needs nonempty sets");
    std::vector<char> role(g.vertex_count(), 2);
    for (Vertex v : B.members()) role[v] = 0;
    for (Vertex v : A.members()) {
        if (role[v] == 0) throw DomainError("resistance sets must be disjoint");
        role[v] = 1;
    }
    std::vector<Vertex> free;
    std::vector<Vertex> touched;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (role[v] == 2) free.push_back(v);
        if (role[v] != 0) touched.push_back(v);
    }
    double energy = capacitor_energy(g, role, free, touched);
    return energy > 0.0 ? 1.0 / energy : std::numeric_limits<double>::infinity();
}

double annulus_resistance(const WeightedGraph& g, Vertex x, int S, int R) {
    if (S < 0 || S >= R) throw DomainError("annulus resistance requires 0 <= S < R");
    auto layers = ball_layers(g, x, R);
    if (layers.size() >= static_cast<std::size_t>(g.vertex_count())) {
        throw DomainError("B(x,R) is the whole graph; the outer set is empty");
    }
    std::vector<char> role(g.vertex_count(), 0);
    std::vector<Vertex> free;
    std::vector<Vertex> touched;
    for (auto [v, d] : layers) {
        role[v] = d <= S ? 1 : 2;
        if (d > S) free.push_back(v);
        touched.push_back(v);
    }
    double energy = capacitor_energy(g, role, free, touched);
    return energy > 0.0 ? 1.0 / energy : std::numeric_limits<double>::infinity();
}

GreenOperator::GreenOperator(const WeightedGraph& g, const VertexSet& B)
    : g_(&g), domain_(B), system_(g, B.members()) {}

std::shared_ptr<const std::vector<double>> GreenOperator::kernel_row(Vertex y) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = rows_.find(y); it != rows_.end()) return it->second;
    }
    const int iy = system_.local_index(y);
    auto row = std::make_shared<std::vector<double>>(domain_.size(), 0.0);
    double residual = 0.0;
    if (iy >= 0) {
        // System rows follow domain order, which is sorted like domain_.members().
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_.size()));
        e[iy] = 1.0;
        Eigen::VectorXd sol = system_.solve(e);
        Eigen::VectorXd r = system_.multiply(sol) - e;
        residual = (r.cwiseQuotient(system_.measure())).cwiseAbs().maxCoeff() * g_->measure(y);
        row->assign(sol.data(), sol.data() + sol.size());
    }
    std::lock_guard lock(mutex_);
    residual_ = std::max(residual_, residual);
    return rows_.try_emplace(y, std::move(row)).first->second;
}

double GreenOperator::kernel(Vertex y, Vertex z) const {
    const int iz = system_.local_index(z);
    if (iz < 0 || system_.local_index(y) < 0) return 0.0;
    return (*kernel_row(y))[iz];
}

double GreenOperator::green(Vertex y, Vertex z) const { return kernel(y, z) * g_->measure(z); }

double GreenOperator::row_sum(Vertex y) const {
    if (system_.local_index(y) < 0) return 0.0;
    auto row = kernel_row(y);
    double s = 0.0;
    for (std::size_t i = 0; i < row->size(); ++i) s += (*row)[i] * g_->measure(domain_.members()[i]);
    return s;
}

double GreenOperator::max_residual() const {
    std::lock_guard lock(mutex_);
    return residual_;
}

EigenResult smallest_eigenvalue(const WeightedGraph& g, const VertexSet& B, double rel_tol, int max_iterations) {
    if (B.empty()) throw DomainError("eigenvalue of an empty domain");
    DirichletSystem system(g, B.members());
    const Eigen::VectorXd& mu = system.measure();

    Eigen::VectorXd v = Eigen::VectorXd::Ones(mu.size());
    v /= std::sqrt(v.dot(mu.cwiseProduct(v)));
    double lambda = v.dot(system.multiply(v));
    EigenResult out;
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd w = system.solve(mu.cwiseProduct(v));
        v = w / std::sqrt(w.dot(mu.cwiseProduct(w)));
        Eigen::VectorXd Lv = system.multiply(v);
        const double next = v.dot(Lv);
        Eigen::VectorXd r = Lv - next * mu.cwiseProduct(v);
        const double residual = std::sqrt(r.dot(r.cwiseQuotient(mu))) / next;
        const double change = std::abs(next - lambda) / next;
        lambda = next;
        if (change < 1e-3 * rel_tol && residual < std::sqrt(rel_tol) * 1e-2) {
            out.value = lambda;
            out.iterations = it;
            out.residual = residual;
            out.vector.assign(v.data(), v.data() + v.size());
            return out;
        }
    }
    throw NumericalError("inverse iteration hit the iteration cap", lambda);
}

double resolvent_kernel(const WeightedGraph& g, const VertexSet& B, double lambda, int m, Vertex x) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("resolvent requires 0 < lambda < 1");
    if (m < 1) throw DomainError("resolvent power m must be positive");
    if (!B.contains(x)) throw DomainError("resolvent center must lie in B");
    if (B.size() >= static_cast<std::size_t>(g.vertex_count())) throw DomainError("resolvent needs a proper domain");
    DirichletSystem system(g, B.members(), lambda);
    const int ix = system.local_index(x);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B.size()));
    u[ix] = 1.0;
    for (int k = 0; k < m; ++k) u = system.solve(system.measure().cwiseProduct(u));
    return u[ix] / g.measure(x);
}

}  // namespace hklab
