#pragma once

#include <cstdint>

#include "densadapt/mesh.hpp"
#include "densadapt/rng.hpp"

namespace densadapt {

/// Points drawn uniformly by area from a mesh surface, each carrying the
/// unit normal of its source triangle and an importance weight (barycentric
/// interpolation of optional per-vertex weights, 1 otherwise).
struct SurfaceSamples {
    Eigen::MatrixX3d points;
    Eigen::MatrixX3d normals;
    Eigen::VectorXd weights;
};

SurfaceSamples sample_surface(const TriMesh& mesh, int count, Rng& rng,
                              const ScalarField* vertex_weights = nullptr);

struct EvalMetrics {
    double chamfer = 0.0;            // 0.5 (forward + backward)
    double normal_mse = 0.0;         // 0.5 (forward + backward), mean |n - n_hat|^2
    double forward_distance = 0.0;   // fitted -> reference mean closest distance
    double backward_distance = 0.0;  // reference -> fitted
};

/// Symmetric sampled surface comparison: `samples` points each way, closest
/// point found on the other mesh, distances and squared normal differences
/// averaged. Optional per-vertex weights on the reference mesh bias both
/// averages toward the weighted region (weights enter via the reference-side
/// sample or hit point). Deterministic for a fixed seed and inputs.
EvalMetrics eval_meshes(const TriMesh& fitted, const TriMesh& reference, int samples,
                        std::uint64_t seed, int threads = 1,
                        const ScalarField* reference_vertex_weights = nullptr);

}  // namespace densadapt
