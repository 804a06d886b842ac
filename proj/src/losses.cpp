#include "densadapt/losses.hpp"

#include <Eigen/Geometry>
#include <cstdio>

#include "densadapt/errors.hpp"

namespace densadapt {

namespace {
constexpr double kKink = 1e-12;  // below this distance the Chamfer direction is undefined
}

double chamfer_loss(const Eigen::MatrixX3d& p, const Correspondence& corr) {
    return (p - corr.points).rowwise().norm().mean();
}

VectorField chamfer_loss_gradient(const Eigen::MatrixX3d& p, const Correspondence& corr) {
    const int n = static_cast<int>(p.rows());
    VectorField grad = VectorField::Zero(n, 3);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d offset = p.row(i) - corr.points.row(i);
        double dist = offset.norm();
        if (dist > kKink) grad.row(i) = inv_n * offset / dist;
    }
    return grad;
}

namespace {

// Accumulated (unnormalized) area-weighted vertex normals: each incident
// face adds its edge cross product.
VectorField accumulate_normals(const TriMesh& mesh) {
    VectorField accum = VectorField::Zero(mesh.vertex_count(), 3);
    for (int k = 0; k < mesh.face_count(); ++k) {
        int a = mesh.faces(k, 0), b = mesh.faces(k, 1), c = mesh.faces(k, 2);
        Eigen::Vector3d cross =
            (mesh.positions.row(b) - mesh.positions.row(a))
                .cross(mesh.positions.row(c) - mesh.positions.row(a));
        accum.row(a) += cross;
        accum.row(b) += cross;
        accum.row(c) += cross;
    }
    return accum;
}

}  // namespace

double normal_loss(const TriMesh& mesh, const Correspondence& corr) {
    VectorField accum = accumulate_normals(mesh);
    const int n = mesh.vertex_count();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double len = accum.row(i).norm();
        if (len < 1e-300) {
            sum += 1.0;  // degenerate: treated as orthogonal, no gradient
        } else {
            sum += 1.0 - accum.row(i).dot(corr.normals.row(i)) / len;
        }
    }
    return sum / static_cast<double>(n);
}

VectorField normal_loss_gradient(const TriMesh& mesh, const Correspondence& corr) {
    const int n = mesh.vertex_count();
    VectorField accum = accumulate_normals(mesh);

    // q_i = dD_n/dm_i where m_i is the accumulated normal:
    // n = m/|m|, d(1 - n.nhat)/dm = -(I - n n^T) nhat / |m|.
    VectorField q(n, 3);
    int degenerate = 0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
        double len = accum.row(i).norm();
        if (len < 1e-300) {
            q.row(i).setZero();
            ++degenerate;
            continue;
        }
        Eigen::Vector3d unit = accum.row(i) / len;
        Eigen::Vector3d nhat = corr.normals.row(i);
        q.row(i) = -inv_n * (nhat - unit * unit.dot(nhat)) / len;
    }
    if (degenerate > 0)
        std::fprintf(stderr, "warning: %d degenerate source normal(s) in normal loss\n",
                     degenerate);

    // Push q through each face's cross product c = e1 x e2 with
    // e1 = b - a, e2 = c - a. For downstream gradient g: the e1 part is
    // e2 x g, the e2 part is g x e1.
    VectorField grad = VectorField::Zero(n, 3);
    for (int k = 0; k < mesh.face_count(); ++k) {
        int a = mesh.faces(k, 0), b = mesh.faces(k, 1), c = mesh.faces(k, 2);
        Eigen::Vector3d e1 = mesh.positions.row(b) - mesh.positions.row(a);
        Eigen::Vector3d e2 = mesh.positions.row(c) - mesh.positions.row(a);
        Eigen::Vector3d g = q.row(a) + q.row(b) + q.row(c);
        Eigen::Vector3d g_e1 = e2.cross(g);
        Eigen::Vector3d g_e2 = g.cross(e1);
        grad.row(b) += g_e1;
        grad.row(c) += g_e2;
        grad.row(a) -= g_e1 + g_e2;
    }
    return grad;
}

double landmark_loss(const Eigen::MatrixX3d& p, const std::vector<int>& indices,
                     const Eigen::MatrixX3d& targets) {
    const int b = static_cast<int>(indices.size());
    if (b == 0) throw ConfigError("landmark loss needs at least one landmark");
    if (targets.rows() != b) throw ConfigError("landmark index/target count mismatch");
    double sum = 0.0;
    for (int i = 0; i < b; ++i) {
        if (indices[i] < 0 || indices[i] >= p.rows())
            throw ConfigError("landmark vertex index out of range: " +
                              std::to_string(indices[i]));
        sum += (p.row(indices[i]) - targets.row(i)).squaredNorm();
    }
    return sum / static_cast<double>(b);
}

VectorField landmark_loss_gradient(const Eigen::MatrixX3d& p, const std::vector<int>& indices,
                                   const Eigen::MatrixX3d& targets) {
    const int b = static_cast<int>(indices.size());
    if (b == 0) throw ConfigError("landmark loss needs at least one landmark");
    if (targets.rows() != b) throw ConfigError("landmark index/target count mismatch");
    VectorField grad = VectorField::Zero(p.rows(), 3);
    const double scale = 2.0 / static_cast<double>(b);
    for (int i = 0; i < b; ++i) {
        if (indices[i] < 0 || indices[i] >= p.rows())
            throw ConfigError("landmark vertex index out of range: " +
                              std::to_string(indices[i]));
        grad.row(indices[i]) += scale * (p.row(indices[i]) - targets.row(i));
    }
    return grad;
}

}  // namespace densadapt
