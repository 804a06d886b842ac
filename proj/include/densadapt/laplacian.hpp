#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "densadapt/mesh.hpp"

namespace densadapt {

/// Uniform-weight discrete Laplace operator: row i has diagonal 1 and
/// -1/|ring(i)| at each neighbor, so (L p)_i = p_i - mean of neighbors.
/// Row sums are zero; constant vectors are in the kernel. Note L is not
/// symmetric under these weights.
using SparseLaplacian = Eigen::SparseMatrix<double>;

/// Builds the uniform Laplacian for a mesh.
/// Throws MeshError if any vertex has an empty one-ring.
SparseLaplacian build_laplacian(const TriMesh& mesh);

/// E = 1/2 tr(p^T L p). Gradient is 1/2 (L + L^T) p.
double laplacian_energy(const SparseLaplacian& L, const Eigen::MatrixX3d& p);
VectorField laplacian_energy_gradient(const SparseLaplacian& L, const Eigen::MatrixX3d& p);

/// E = 1/2 sum_i |(L p)_i|^2. Gradient is L^T L p.
double bilaplacian_energy(const SparseLaplacian& L, const Eigen::MatrixX3d& p);
VectorField bilaplacian_energy_gradient(const SparseLaplacian& L, const Eigen::MatrixX3d& p);

/// Prefactored backward-Euler diffusion operator A = I + lambda*L.
///
/// Connectivity never changes during an optimization run, so the LU
/// factorization is computed once and reused for every solve. A is strictly
/// diagonally dominant for lambda >= 0 under uniform weights, but it is not
/// symmetric, hence the LU (rather than Cholesky) factorization and the
/// explicit transpose-solve used by the gradient pullback.
class DiffusionSystem {
public:
    /// Factors I + lambda*L. Throws ConfigError for lambda < 0 and
    /// SolverError if the factorization fails.
    DiffusionSystem(const SparseLaplacian& L, double lambda);

    double lambda() const { return lambda_; }

    /// A * x.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    /// A^{-1} b.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
    /// A^{-T} b.
    Eigen::MatrixXd solve_transpose(const Eigen::MatrixXd& b) const;

private:
    double lambda_;
    Eigen::SparseMatrix<double> system_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// Convenience wrapper: diffusion_factorize(L, lambda).
inline DiffusionSystem diffusion_factorize(const SparseLaplacian& L, double lambda) {
    return DiffusionSystem(L, lambda);
}

/// Re-parameterization u(p) = (I + lambda*L) p.
inline VectorField to_u(const DiffusionSystem& sys, const Eigen::MatrixX3d& p) {
    return sys.apply(p);
}

/// p(u) = (I + lambda*L)^{-1} u.
inline VectorField to_p(const DiffusionSystem& sys, const Eigen::MatrixX3d& u) {
    return sys.solve(u);
}

/// Chain rule through p(u): g_u = (I + lambda*L)^{-T} g_p.
inline VectorField pullback_gradient(const DiffusionSystem& sys, const Eigen::MatrixX3d& g_p) {
    return sys.solve_transpose(g_p);
}

}  // namespace densadapt
