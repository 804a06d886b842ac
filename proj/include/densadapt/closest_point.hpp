#pragma once

#include <vector>

#include "densadapt/mesh.hpp"

namespace densadapt {

/// Exact closest point on a single triangle (a, b, c) to query q.
/// Also reports the barycentric coordinates of the result.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& q, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                          Eigen::Vector3d* barycentric = nullptr);

/// Per-source-vertex correspondence to the target surface.
struct Correspondence {
    Eigen::MatrixX3d points;       // closest surface points
    Eigen::MatrixX3d normals;      // unit target normals interpolated at those points
    std::vector<int> triangle;     // target triangle of each closest point
    Eigen::MatrixX3d barycentric;  // coordinates of the point in its triangle
};

/// Median-split AABB tree over the target triangles, answering exact
/// nearest-surface-point queries. The target mesh and its vertex normals are
/// copied at build time, so the index is self-contained and immutable;
/// queries are read-only and safe to issue from many threads.
class SurfaceIndex {
public:
    /// Throws ConfigError if the target has no triangles.
    explicit SurfaceIndex(const TriMesh& target);

    const TriMesh& target() const { return target_; }
    const VectorField& target_normals() const { return target_normals_; }

    /// Globally nearest surface point to q (exact, full point-triangle test
    /// inside the pruned subtree).
    struct Hit {
        Eigen::Vector3d point;
        Eigen::Vector3d barycentric;
        int triangle;
        double distance;
    };
    Hit closest(const Eigen::Vector3d& q) const;

private:
    struct Node {
        Eigen::Vector3d bmin, bmax;
        int left = -1, right = -1;  // children, or
        int start = 0, count = 0;   // triangle range when leaf (count > 0)
    };

    int build_node(int start, int count, std::vector<Eigen::Vector3d>& centroids);
    double box_distance_sq(const Node& node, const Eigen::Vector3d& q) const;

    TriMesh target_;
    VectorField target_normals_;
    std::vector<Node> nodes_;
    std::vector<int> order_;  // triangle indices, permuted during build
};

/// Closest points for every row of p, fanned out over `threads` workers.
/// Each vertex is a pure independent query, so the result does not depend
/// on the thread count. Interpolated target normals are renormalized.
Correspondence closest_points(const SurfaceIndex& index, const Eigen::MatrixX3d& p,
                              int threads = 1);

}  // namespace densadapt
