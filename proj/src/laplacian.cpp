#include "densadapt/laplacian.hpp"

#include <vector>

#include "densadapt/errors.hpp"

namespace densadapt {

SparseLaplacian build_laplacian(const TriMesh& mesh) {
    const int n = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<size_t>(n) * 7);
    for (int i = 0; i < n; ++i) {
        const auto& ring = mesh.one_ring[i];
        if (ring.empty())
            throw MeshError("vertex " + std::to_string(i) + " is isolated");
        double w = 1.0 / static_cast<double>(ring.size());
        entries.emplace_back(i, i, 1.0);
        for (int j : ring) entries.emplace_back(i, j, -w);
    }
    SparseLaplacian L(n, n);
    L.setFromTriplets(entries.begin(), entries.end());
    L.makeCompressed();
    return L;
}

double laplacian_energy(const SparseLaplacian& L, const Eigen::MatrixX3d& p) {
    return 0.5 * (p.transpose() * (L * p)).trace();
}

VectorField laplacian_energy_gradient(const SparseLaplacian& L, const Eigen::MatrixX3d& p) {
    return 0.5 * (L * p + L.transpose() * p);
}

double bilaplacian_energy(const SparseLaplacian& L, const Eigen::MatrixX3d& p) {
    return 0.5 * (L * p).squaredNorm();
}

VectorField bilaplacian_energy_gradient(const SparseLaplacian& L, const Eigen::MatrixX3d& p) {
    return L.transpose() * (L * p);
}

DiffusionSystem::DiffusionSystem(const SparseLaplacian& L, double lambda) : lambda_(lambda) {
    if (lambda < 0.0) throw ConfigError("diffusion lambda must be nonnegative");
    Eigen::SparseMatrix<double> identity(L.rows(), L.cols());
    identity.setIdentity();
    system_ = identity + lambda * L;
    system_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(system_);
    if (lu_->info() != Eigen::Success)
        throw SolverError("LU factorization of I + lambda*L failed");
}

Eigen::MatrixXd DiffusionSystem::apply(const Eigen::MatrixXd& x) const {
    return system_ * x;
}

Eigen::MatrixXd DiffusionSystem::solve(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd x = lu_->solve(b);
    if (lu_->info() != Eigen::Success) throw SolverError("diffusion solve failed");
    return x;
}

Eigen::MatrixXd DiffusionSystem::solve_transpose(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd x = lu_->adjoint().solve(b);
    if (lu_->info() != Eigen::Success) throw SolverError("diffusion transpose solve failed");
    return x;
}

}  // namespace densadapt
