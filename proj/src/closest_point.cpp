#include "densadapt/closest_point.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "densadapt/errors.hpp"
#include "densadapt/parallel.hpp"

namespace densadapt {

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& q, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                          Eigen::Vector3d* barycentric) {
    // Voronoi-region walk (Ericson, Real-Time Collision Detection, 5.1.5).
    auto result = [&](const Eigen::Vector3d& point, double u, double v, double w) {
        if (barycentric) *barycentric = Eigen::Vector3d(u, v, w);
        return point;
    };

    Eigen::Vector3d ab = b - a, ac = c - a, aq = q - a;
    double d1 = ab.dot(aq), d2 = ac.dot(aq);
    if (d1 <= 0.0 && d2 <= 0.0) return result(a, 1, 0, 0);

    Eigen::Vector3d bq = q - b;
    double d3 = ab.dot(bq), d4 = ac.dot(bq);
    if (d3 >= 0.0 && d4 <= d3) return result(b, 0, 1, 0);

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return result(a + v * ab, 1 - v, v, 0);
    }

    Eigen::Vector3d cq = q - c;
    double d5 = ab.dot(cq), d6 = ac.dot(cq);
    if (d6 >= 0.0 && d5 <= d6) return result(c, 0, 0, 1);

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return result(a + w * ac, 1 - w, 0, w);
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return result(b + w * (c - b), 0, 1 - w, w);
    }

    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    return result(a + ab * v + ac * w, 1 - v - w, v, w);
}

SurfaceIndex::SurfaceIndex(const TriMesh& target)
    : target_(target), target_normals_(vertex_normals(target)) {
    const int f = target_.face_count();
    if (f == 0) throw ConfigError("surface index requires a target with at least one triangle");

    order_.resize(f);
    std::iota(order_.begin(), order_.end(), 0);
    std::vector<Eigen::Vector3d> centroids(f);
    for (int k = 0; k < f; ++k)
        centroids[k] = (target_.positions.row(target_.faces(k, 0)) +
                        target_.positions.row(target_.faces(k, 1)) +
                        target_.positions.row(target_.faces(k, 2))) /
                       3.0;
    nodes_.reserve(static_cast<size_t>(2 * f));
    build_node(0, f, centroids);
}

int SurfaceIndex::build_node(int start, int count, std::vector<Eigen::Vector3d>& centroids) {
    constexpr int kLeafSize = 4;
    Node node;
    node.bmin = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.bmax = -node.bmin;
    for (int t = start; t < start + count; ++t) {
        int tri = order_[t];
        for (int e = 0; e < 3; ++e) {
            Eigen::Vector3d v = target_.positions.row(target_.faces(tri, e));
            node.bmin = node.bmin.cwiseMin(v);
            node.bmax = node.bmax.cwiseMax(v);
        }
    }

    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (count <= kLeafSize) {
        nodes_[self].start = start;
        nodes_[self].count = count;
        return self;
    }

    // Median split on the widest centroid axis; ties broken by triangle id
    // so the tree is identical across runs.
    Eigen::Vector3d cmin = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d cmax = -cmin;
    for (int t = start; t < start + count; ++t) {
        cmin = cmin.cwiseMin(centroids[order_[t]]);
        cmax = cmax.cwiseMax(centroids[order_[t]]);
    }
    int axis;
    (cmax - cmin).maxCoeff(&axis);
    int mid = start + count / 2;
    std::nth_element(order_.begin() + start, order_.begin() + mid,
                     order_.begin() + start + count, [&](int lhs, int rhs) {
                         double a = centroids[lhs][axis], b = centroids[rhs][axis];
                         return a < b || (a == b && lhs < rhs);
                     });

    int left = build_node(start, mid - start, centroids);
    int right = build_node(mid, start + count - mid, centroids);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

double SurfaceIndex::box_distance_sq(const Node& node, const Eigen::Vector3d& q) const {
    Eigen::Vector3d d = (node.bmin - q).cwiseMax(q - node.bmax).cwiseMax(0.0);
    return d.squaredNorm();
}

SurfaceIndex::Hit SurfaceIndex::closest(const Eigen::Vector3d& q) const {
    Hit best;
    best.triangle = -1;
    double best_sq = std::numeric_limits<double>::infinity();

    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (box_distance_sq(node, q) >= best_sq) continue;
        if (node.count > 0) {
            for (int t = node.start; t < node.start + node.count; ++t) {
                int tri = order_[t];
                Eigen::Vector3d bary;
                Eigen::Vector3d point = closest_point_on_triangle(
                    q, target_.positions.row(target_.faces(tri, 0)),
                    target_.positions.row(target_.faces(tri, 1)),
                    target_.positions.row(target_.faces(tri, 2)), &bary);
                double d2 = (point - q).squaredNorm();
                if (d2 < best_sq) {
                    best_sq = d2;
                    best.point = point;
                    best.barycentric = bary;
                    best.triangle = tri;
                }
            }
        } else {
            // Visit the nearer child first for tighter pruning.
            double dl = box_distance_sq(nodes_[node.left], q);
            double dr = box_distance_sq(nodes_[node.right], q);
            int near = node.left, far = node.right;
            if (dr < dl) std::swap(near, far);
            stack[top++] = far;
            stack[top++] = near;
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

Correspondence closest_points(const SurfaceIndex& index, const Eigen::MatrixX3d& p,
                              int threads) {
    const int n = static_cast<int>(p.rows());
    Correspondence corr;
    corr.points.resize(n, 3);
    corr.normals.resize(n, 3);
    corr.barycentric.resize(n, 3);
    corr.triangle.resize(n);

    const auto& faces = index.target().faces;
    const auto& normals = index.target_normals();
    parallel_for(n, threads, [&](int i) {
        SurfaceIndex::Hit hit = index.closest(p.row(i));
        corr.points.row(i) = hit.point;
        corr.barycentric.row(i) = hit.barycentric;
        corr.triangle[i] = hit.triangle;
        Eigen::Vector3d normal = hit.barycentric[0] * normals.row(faces(hit.triangle, 0)) +
                                 hit.barycentric[1] * normals.row(faces(hit.triangle, 1)) +
                                 hit.barycentric[2] * normals.row(faces(hit.triangle, 2));
        double len = normal.norm();
        corr.normals.row(i) = len > 1e-300 ? (normal / len).eval() : Eigen::Vector3d(0, 0, 1);
    });
    return corr;
}

}  // namespace densadapt
