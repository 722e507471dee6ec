#include "hklab/dirichlet.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "hklab/errors.hpp"

namespace hklab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct DirichletSystem::Impl {
    SparseMatrix matrix;
    SolverKind kind = SolverKind::elimination;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
};

DirichletSystem::DirichletSystem(const WeightedGraph& g, std::span<const Vertex> domain, double shift)
    : domain_(domain.begin(), domain.end()), local_(g.vertex_count(), -1), impl_(std::make_unique<Impl>()) {
    if (domain_.empty()) throw DomainError("empty Dirichlet domain");
    if (domain_.size() >= static_cast<std::size_t>(g.vertex_count()) && shift <= 0.0) {
        throw DomainError("Dirichlet domain covers the whole graph; the killed operator is singular");
    }
    for (std::size_t i = 0; i < domain_.size(); ++i) {
        g.require_vertex(domain_[i]);
        if (local_[domain_[i]] != -1) throw DomainError("duplicate vertex in Dirichlet domain");
        local_[domain_[i]] = static_cast<int>(i);
    }

    const auto n = static_cast<Eigen::Index>(domain_.size());
    mu_.resize(n);
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index i = 0; i < n; ++i) {
        Vertex x = domain_[i];
        mu_[i] = g.measure(x);
        triplets.emplace_back(i, i, (1.0 + shift) * g.measure(x));
        auto nb = g.neighbors(x);
        auto w = g.neighbor_weights(x);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            int j = local_[nb[k]];
            if (j >= 0) triplets.emplace_back(i, j, -w[k]);
        }
    }
    impl_->matrix.resize(n, n);
    impl_->matrix.setFromTriplets(triplets.begin(), triplets.end());
    impl_->matrix.makeCompressed();

    if (domain_.size() < kEliminationLimit) {
        impl_->kind = SolverKind::elimination;
        impl_->ldlt.compute(impl_->matrix);
        if (impl_->ldlt.info() != Eigen::Success) throw NumericalError("LDL^T factorisation failed", 0.0);
    } else {
        impl_->kind = SolverKind::conjugate_gradient;
        impl_->cg.setTolerance(kIterativeTolerance);
        impl_->cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * n));
        impl_->cg.compute(impl_->matrix);
        if (impl_->cg.info() != Eigen::Success) throw NumericalError("CG preconditioner setup failed", 0.0);
    }
}

DirichletSystem::~DirichletSystem() = default;
DirichletSystem::DirichletSystem(DirichletSystem&&) noexcept = default;
DirichletSystem& DirichletSystem::operator=(DirichletSystem&&) noexcept = default;

int DirichletSystem::local_index(Vertex v) const {
    return v >= 0 && static_cast<std::size_t>(v) < local_.size() ? local_[v] : -1;
}

SolverKind DirichletSystem::kind() const noexcept { return impl_->kind; }

Eigen::VectorXd DirichletSystem::solve(const Eigen::VectorXd& rhs) const {
    if (impl_->kind == SolverKind::elimination) return impl_->ldlt.solve(rhs);

    Eigen::VectorXd u = impl_->cg.solve(rhs);
    if (impl_->cg.info() != Eigen::Success) {
        double rel = (rhs - impl_->matrix * u).norm() / std::max(rhs.norm(), 1e-300);
        throw NumericalError("conjugate gradient did not converge", rel);
    }
    // One refinement sweep recovers the digits CG leaves in the high-measure rows.
    Eigen::VectorXd r = rhs - impl_->matrix * u;
    if (r.norm() > 0.0) {
        Eigen::VectorXd du = impl_->cg.solve(r);
        if (impl_->cg.info() == Eigen::Success) u += du;
    }
    return u;
}

Eigen::VectorXd DirichletSystem::multiply(const Eigen::VectorXd& u) const { return impl_->matrix * u; }

double DirichletSystem::operator_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& f) const {
    Eigen::VectorXd r = (impl_->matrix * u).cwiseQuotient(mu_) - f;
    return r.cwiseAbs().maxCoeff();
}

}  // namespace hklab
