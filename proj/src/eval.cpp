#include "densadapt/eval.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <vector>

#include "densadapt/closest_point.hpp"
#include "densadapt/errors.hpp"

namespace densadapt {

namespace {

Eigen::MatrixX3d face_unit_normals(const TriMesh& mesh)
{
    Eigen::MatrixX3d n(mesh.face_count(), 3);
    for (int f = 0; f < mesh.face_count(); ++f) {
        const Eigen::Vector3d a = mesh.positions.row(mesh.faces(f, 0));
        const Eigen::Vector3d b = mesh.positions.row(mesh.faces(f, 1));
        const Eigen::Vector3d c = mesh.positions.row(mesh.faces(f, 2));
        Eigen::Vector3d cr = (b - a).cross(c - a);
        const double len = cr.norm();
        n.row(f) = len > 0.0 ? (cr / len).transpose().eval() : Eigen::RowVector3d(0, 0, 1);
    }
    return n;
}

}  // namespace

SurfaceSamples sample_surface(const TriMesh& mesh, int count, Rng& rng,
                              const ScalarField* vertex_weights)
{
    if (count <= 0) {
        throw ConfigError("sample count must be positive");
    }
    if (vertex_weights && vertex_weights->size() != mesh.vertex_count()) {
        throw ConfigError("vertex weight count does not match mesh");
    }
    const int nf = mesh.face_count();
    if (nf == 0) {
        throw MeshError("cannot sample a mesh with no faces");
    }

    // Cumulative area table for proportional triangle selection.
    std::vector<double> cum(nf);
    double total = 0.0;
    for (int f = 0; f < nf; ++f) {
        const Eigen::Vector3d a = mesh.positions.row(mesh.faces(f, 0));
        const Eigen::Vector3d b = mesh.positions.row(mesh.faces(f, 1));
        const Eigen::Vector3d c = mesh.positions.row(mesh.faces(f, 2));
        total += 0.5 * (b - a).cross(c - a).norm();
        cum[f] = total;
    }
    if (total <= 0.0) {
        throw MeshError("cannot sample a mesh with zero total area");
    }

    const Eigen::MatrixX3d fn = face_unit_normals(mesh);

    SurfaceSamples s;
    s.points.resize(count, 3);
    s.normals.resize(count, 3);
    s.weights.resize(count);

    for (int k = 0; k < count; ++k) {
        const double pick = uniform01(rng) * total;
        const int f = static_cast<int>(
            std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
        const int fc = std::min(f, nf - 1);

        // Square-root trick gives uniform barycentric coordinates.
        const double r1 = std::sqrt(uniform01(rng));
        const double r2 = uniform01(rng);
        const double w0 = 1.0 - r1;
        const double w1 = r1 * (1.0 - r2);
        const double w2 = r1 * r2;

        const int i0 = mesh.faces(fc, 0), i1 = mesh.faces(fc, 1), i2 = mesh.faces(fc, 2);
        s.points.row(k) =
            w0 * mesh.positions.row(i0) + w1 * mesh.positions.row(i1) + w2 * mesh.positions.row(i2);
        s.normals.row(k) = fn.row(fc);
        s.weights[k] = vertex_weights
                           ? w0 * (*vertex_weights)[i0] + w1 * (*vertex_weights)[i1] +
                                 w2 * (*vertex_weights)[i2]
                           : 1.0;
    }
    return s;
}

namespace {

struct DirectionalStats {
    double distance = 0.0;
    double normal_mse = 0.0;
};

// Mean closest-point distance and mean squared normal difference from the
// samples to the indexed mesh, weighted by per-sample weights (for the
// forward direction the weight is read off the hit point instead).
DirectionalStats one_direction(const SurfaceSamples& samples, const SurfaceIndex& index,
                               const Eigen::MatrixX3d& index_face_normals,
                               const ScalarField* hit_vertex_weights, const TriMesh& index_mesh)
{
    double wsum = 0.0, dsum = 0.0, nsum = 0.0;
    for (int k = 0; k < samples.points.rows(); ++k) {
        const auto hit = index.closest(samples.points.row(k));
        double w = samples.weights[k];
        if (hit_vertex_weights) {
            const int i0 = index_mesh.faces(hit.triangle, 0);
            const int i1 = index_mesh.faces(hit.triangle, 1);
            const int i2 = index_mesh.faces(hit.triangle, 2);
            w = hit.barycentric[0] * (*hit_vertex_weights)[i0] +
                hit.barycentric[1] * (*hit_vertex_weights)[i1] +
                hit.barycentric[2] * (*hit_vertex_weights)[i2];
        }
        wsum += w;
        dsum += w * hit.distance;
        nsum += w * (samples.normals.row(k) - index_face_normals.row(hit.triangle)).squaredNorm();
    }
    if (wsum <= 0.0) {
        throw ConfigError("evaluation weights sum to zero");
    }
    return {dsum / wsum, nsum / wsum};
}

}  // namespace

EvalMetrics eval_meshes(const TriMesh& fitted, const TriMesh& reference, int samples,
                        std::uint64_t seed, int threads, const ScalarField* reference_vertex_weights)
{
    (void)threads;  // queries are cheap enough sequentially at default sample counts
    Rng rng(seed);

    const SurfaceSamples from_fitted = sample_surface(fitted, samples, rng);
    const SurfaceSamples from_reference = sample_surface(reference, samples, rng,
                                                         reference_vertex_weights);

    const SurfaceIndex fitted_index(fitted);
    const SurfaceIndex reference_index(reference);
    const Eigen::MatrixX3d fitted_fn = face_unit_normals(fitted);
    const Eigen::MatrixX3d reference_fn = face_unit_normals(reference);

    const DirectionalStats fwd = one_direction(from_fitted, reference_index, reference_fn,
                                               reference_vertex_weights, reference);
    const DirectionalStats bwd = one_direction(from_reference, fitted_index, fitted_fn,
                                               nullptr, fitted);

    EvalMetrics m;
    m.forward_distance = fwd.distance;
    m.backward_distance = bwd.distance;
    m.chamfer = 0.5 * (fwd.distance + bwd.distance);
    m.normal_mse = 0.5 * (fwd.normal_mse + bwd.normal_mse);
    return m;
}

}  // namespace densadapt
