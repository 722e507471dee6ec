#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hklab/graph.hpp"

namespace hklab {

enum class SolverKind { elimination, conjugate_gradient };

/// Balls below this size are solved by sparse LDL^T; larger ones by preconditioned CG.
inline constexpr std::size_t kEliminationLimit = 2000;
inline constexpr double kIterativeTolerance = 1e-12;

/**
 * The killed operator on a finite domain A in its mu-symmetrised form
 *
 *     M = (1 + shift) D_A - W_AA,
 *
 * so that M u = D_A f  <=>  ((1 + shift) I - P^A) u = f. M is a symmetric M-matrix,
 * positive definite whenever A is a proper subset of a connected graph.
 */
class DirichletSystem {
public:
    DirichletSystem(const WeightedGraph& g, std::span<const Vertex> domain, double shift = 0.0);
    ~DirichletSystem();
    DirichletSystem(DirichletSystem&&) noexcept;
    DirichletSystem& operator=(DirichletSystem&&) noexcept;

    std::size_t size() const noexcept { return domain_.size(); }
    std::span<const Vertex> domain() const noexcept { return domain_; }
    /// Local index of v, or -1 when v is outside the domain.
    int local_index(Vertex v) const;
    const Eigen::VectorXd& measure() const noexcept { return mu_; }
    SolverKind kind() const noexcept;

    /// Solves M u = rhs.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::VectorXd multiply(const Eigen::VectorXd& u) const;
    /// max_i |((1+shift)I - P^A) u - f|_i for M u = D f.
    double operator_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& f) const;

private:
    struct Impl;
    std::vector<Vertex> domain_;
    std::vector<int> local_;
    Eigen::VectorXd mu_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hklab
