#pragma once

#include "densadapt/laplacian.hpp"
#include "densadapt/mesh.hpp"

namespace densadapt {

/// Desired mean edge length per vertex. Uniform targets hold one shared
/// value; adaptive targets are bounded above by the current mean edge
/// lengths elementwise.
struct EdgeLengthTarget {
    enum class Kind { Uniform, Adaptive };
    ScalarField lengths;
    Kind kind = Kind::Uniform;
};

/// l_i = mean over one-ring neighbors of |p_i - p_j|.
ScalarField mean_edge_lengths(const TriMesh& mesh);

/// Average of the per-vertex mean edge lengths (the global length scale).
double mean_edge_length_scale(const TriMesh& mesh);

/// Adaptation energy E_a = (1/N) |l(p) - l'|^2.
double adaptation_energy(const TriMesh& mesh, const EdgeLengthTarget& target);

/// Exact gradient of E_a with respect to vertex positions. Moving p_i
/// changes the mean edge length at i and at every neighbor; both paths are
/// included. Zero-length edges contribute no direction (subgradient choice)
/// and produce a warning.
VectorField adaptation_gradient(const TriMesh& mesh, const EdgeLengthTarget& target);

/// Uniform density target: every entry equals the current global mean edge
/// length scale.
EdgeLengthTarget uniform_target(const TriMesh& mesh);

/// K_i = |(L p)_i| / l_m(p): Laplacian magnitude normalized by the global
/// edge-length scale, so K is dimensionless and scale invariant. High K
/// marks high-curvature regions.
ScalarField curvature_magnitudes(const TriMesh& mesh, const SparseLaplacian& L);

/// One backward-Euler diffusion step S = (I + lambda_s L)^{-1} K, smoothing
/// the curvature field before it drives the density target.
ScalarField smooth_field(const ScalarField& K, const DiffusionSystem& smoother);
ScalarField smooth_field(const ScalarField& K, const SparseLaplacian& L, double lambda_s);

/// Adaptive density target l'_k = l elementwise-scaled by clamp(mean(S)/S)
/// into [0,1]: vertices with above-average smoothed curvature get shorter
/// target lengths, others keep their current length. Uses a prefactored
/// smoother so the per-iteration cost is one triangular solve.
EdgeLengthTarget adaptive_target(const TriMesh& mesh, const SparseLaplacian& L,
                                 const DiffusionSystem& smoother);
EdgeLengthTarget adaptive_target(const TriMesh& mesh, const SparseLaplacian& L,
                                 double lambda_s = 1.0);

}  // namespace densadapt
