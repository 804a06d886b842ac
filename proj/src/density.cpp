#include "densadapt/density.hpp"

#include <cstdio>

#include "densadapt/errors.hpp"

namespace densadapt {

ScalarField mean_edge_lengths(const TriMesh& mesh) {
    const int n = mesh.vertex_count();
    ScalarField l(n);
    for (int i = 0; i < n; ++i) {
        const auto& ring = mesh.one_ring[i];
        double sum = 0.0;
        for (int j : ring) sum += (mesh.positions.row(i) - mesh.positions.row(j)).norm();
        l[i] = ring.empty() ? 0.0 : sum / static_cast<double>(ring.size());
    }
    return l;
}

double mean_edge_length_scale(const TriMesh& mesh) {
    return mean_edge_lengths(mesh).mean();
}

double adaptation_energy(const TriMesh& mesh, const EdgeLengthTarget& target) {
    const int n = mesh.vertex_count();
    if (target.lengths.size() != n)
        throw ConfigError("edge-length target size does not match vertex count");
    return (mean_edge_lengths(mesh) - target.lengths).squaredNorm() / static_cast<double>(n);
}

VectorField adaptation_gradient(const TriMesh& mesh, const EdgeLengthTarget& target) {
    const int n = mesh.vertex_count();
    if (target.lengths.size() != n)
        throw ConfigError("edge-length target size does not match vertex count");

    ScalarField residual = mean_edge_lengths(mesh) - target.lengths;
    VectorField grad = VectorField::Zero(n, 3);
    const double scale = 2.0 / static_cast<double>(n);
    int zero_edges = 0;

    // dE/dp_i collects one term per incident edge (i,j): the edge length
    // appears in l_i and in l_j, and d|p_i - p_j|/dp_i is the unit edge
    // direction in both cases.
    for (int i = 0; i < n; ++i) {
        const auto& ring_i = mesh.one_ring[i];
        double coeff_i = residual[i] / static_cast<double>(ring_i.size());
        for (int j : ring_i) {
            Eigen::Vector3d edge = mesh.positions.row(i) - mesh.positions.row(j);
            double len = edge.norm();
            if (len < 1e-300) {
                ++zero_edges;
                continue;
            }
            double coeff_j = residual[j] / static_cast<double>(mesh.one_ring[j].size());
            grad.row(i) += scale * (coeff_i + coeff_j) * (edge / len);
        }
    }
    if (zero_edges > 0)
        std::fprintf(stderr,
                     "warning: %d zero-length edge(s) skipped in adaptation gradient\n",
                     zero_edges / 2);
    return grad;
}

EdgeLengthTarget uniform_target(const TriMesh& mesh) {
    EdgeLengthTarget target;
    target.kind = EdgeLengthTarget::Kind::Uniform;
    target.lengths = ScalarField::Constant(mesh.vertex_count(), mean_edge_length_scale(mesh));
    return target;
}

ScalarField curvature_magnitudes(const TriMesh& mesh, const SparseLaplacian& L) {
    VectorField lap = L * mesh.positions;
    double l_m = mean_edge_length_scale(mesh);
    return lap.rowwise().norm() / l_m;
}

ScalarField smooth_field(const ScalarField& K, const DiffusionSystem& smoother) {
    return smoother.solve(K);
}

ScalarField smooth_field(const ScalarField& K, const SparseLaplacian& L, double lambda_s) {
    return DiffusionSystem(L, lambda_s).solve(K);
}

EdgeLengthTarget adaptive_target(const TriMesh& mesh, const SparseLaplacian& L,
                                 const DiffusionSystem& smoother) {
    ScalarField l = mean_edge_lengths(mesh);
    ScalarField S = smoother.solve(curvature_magnitudes(mesh, L));
    const double s_bar = S.mean();

    EdgeLengthTarget target;
    target.kind = EdgeLengthTarget::Kind::Adaptive;
    target.lengths = l;
    if (s_bar <= 0.0) {
        // Perfectly flat input: every vertex keeps its current length.
        std::fprintf(stderr, "info: curvature field is zero, adaptive target equals current lengths\n");
        return target;
    }
    int suspicious = 0;
    for (int i = 0; i < S.size(); ++i) {
        double ratio;
        if (S[i] > 0.0) {
            ratio = std::min(1.0, s_bar / S[i]);
        } else {
            // Flat (or pathological negative) entries keep their length.
            if (S[i] < 0.0) ++suspicious;
            ratio = 1.0;
        }
        target.lengths[i] = l[i] * ratio;
    }
    if (suspicious > 0)
        std::fprintf(stderr, "warning: %d negative smoothed-curvature value(s) clamped\n",
                     suspicious);
    return target;
}

EdgeLengthTarget adaptive_target(const TriMesh& mesh, const SparseLaplacian& L,
                                 double lambda_s) {
    return adaptive_target(mesh, L, DiffusionSystem(L, lambda_s));
}

}  // namespace densadapt
