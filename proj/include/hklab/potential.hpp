#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "hklab/dirichlet.hpp"
#include "hklab/graph.hpp"

namespace hklab {

/// E(f,f) = 1/2 sum_{x,y} mu_xy (f(x) - f(y))^2, f given on every vertex.
double dirichlet_energy(const WeightedGraph& g, std::span<const double> f);

/// Solution of Pu = u on A with prescribed values on the external boundary.
struct DirichletProblem {
    VertexSet domain;
    VertexSet boundary;
    std::vector<Vertex> closure;   // sorted A union dA
    std::vector<double> values;    // u on closure
    double residual = 0.0;         // max_{x in A} |Pu(x) - u(x)|
    bool maximum_principle = true; // min h <= u <= max h on A

    double at(Vertex v) const;
};

/// boundary_data is aligned with boundary(g, A).outer.members().
DirichletProblem harmonic_extension(const WeightedGraph& g, const VertexSet& A, std::span<const double> boundary_data);
DirichletProblem harmonic_extension(const WeightedGraph& g, const VertexSet& A,
                                    const std::function<double(Vertex)>& boundary_data);

/// rho(A,B) = 1 / min{E(f,f) : f|A = 1, f|B = 0}; +infinity when B cannot be reached.
double effective_resistance(const WeightedGraph& g, const VertexSet& A, const VertexSet& B);

/// Annulus resistance between {d(x,.) <= S} and {d(x,.) >= R}, 0 <= S < R.
double annulus_resistance(const WeightedGraph& g, Vertex x, int S, int R);

/// Green function of the walk killed on leaving B; rows are solved on demand and cached.
class GreenOperator {
public:
    GreenOperator(const WeightedGraph& g, const VertexSet& B);

    const VertexSet& domain() const noexcept { return domain_; }
    /// g^B(y, z) for z over domain().members(); zero row when y is outside B.
    std::shared_ptr<const std::vector<double>> kernel_row(Vertex y) const;
    /// g^B(y,z) = G^B(y,z) / mu(z)
    double kernel(Vertex y, Vertex z) const;
    double green(Vertex y, Vertex z) const;
    /// sum_z G^B(y,z) = E_y(T_B)
    double row_sum(Vertex y) const;
    /// Max |(I - P^B) G(y,.) - delta_y| over the rows solved so far.
    double max_residual() const;

private:
    const WeightedGraph* g_;
    VertexSet domain_;
    DirichletSystem system_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<Vertex, std::shared_ptr<const std::vector<double>>> rows_;
    mutable double residual_ = 0.0;
};

struct EigenResult {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;        // ||L v - lambda D v|| / (lambda ||D v||)
    std::vector<double> vector;   // D-normalised, over B's members
};

/// lambda(B): smallest eigenvalue of -Delta^B by inverse iteration in the mu inner product.
EigenResult smallest_eigenvalue(const WeightedGraph& g, const VertexSet& B, double rel_tol = 1e-9,
                                int max_iterations = 200'000);

/// g_{lambda,m}(x,x) = [((lambda+1)I - P^B)^{-m}](x,x) / mu(x), 0 < lambda < 1.
double resolvent_kernel(const WeightedGraph& g, const VertexSet& B, double lambda, int m, Vertex x);

}  // namespace hklab
