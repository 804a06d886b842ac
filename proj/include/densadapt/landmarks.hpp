#pragma once

#include <string>
#include <vector>

#include "densadapt/mesh.hpp"

namespace densadapt {

/// Ordered landmark list. Order defines correspondence across sets, so two
/// sets pair landmark b with landmark b. `indices` is filled only when every
/// landmark is bound to a mesh vertex.
struct LandmarkSet {
    Eigen::MatrixX3d points;
    Eigen::VectorXd weights;   // positive; defaults to all ones
    std::vector<int> indices;  // empty unless bound to vertices

    int size() const { return static_cast<int>(points.rows()); }
};

/// Reads the ASCII landmark format: one landmark per line, either
/// `i <vertex-index>` (resolved against `mesh`, which must then be non-null)
/// or `p <x> <y> <z>`; `#` starts a comment line. Weights default to 1.
LandmarkSet load_landmarks(const std::string& path, const TriMesh* mesh = nullptr);

/// Writes `i <index>` lines when the set is bound, `p <x> <y> <z>` lines
/// otherwise. Each header string becomes a leading `# ...` comment.
void save_landmarks(const std::string& path, const LandmarkSet& set,
                    const std::vector<std::string>& header = {});

/// All-ones weight vector with one emphasized anchor entry.
Eigen::VectorXd anchor_weights(int count, int anchor_index, double anchor_weight);

/// Nearest fitted vertex for each landmark (linear scan, first index wins on
/// ties). Duplicate bindings are permitted and reported on stderr.
std::vector<int> bind_landmarks(const TriMesh& fitted, const LandmarkSet& target_landmarks);

/// Rotation-only weighted Procrustes about the origin: returns the proper
/// rotation R minimizing sum_b w_b |R x_b - y_b|^2, so points * R^T lands on
/// reference. Built from the SVD of X^T W Y with a determinant-sign
/// correction that rules out reflections. Throws ConfigError when the
/// landmarks are collinear (rank < 2 leaves the rotation undetermined).
Eigen::Matrix3d weighted_alignment(const Eigen::MatrixX3d& points,
                                   const Eigen::MatrixX3d& reference,
                                   const Eigen::VectorXd& weights);

/// One corpus entry: a template fitted to some target plus that target's
/// annotated landmarks.
struct FittedTarget {
    TriMesh fitted;
    LandmarkSet landmarks;
};

/// Transfers corpus landmarks onto the undeformed sphere: each target's
/// landmarks are bound to its fitted mesh's nearest vertices, read off as
/// original sphere coordinates at those indices, rigidly aligned to the
/// first fitting, averaged, and snapped to the nearest sphere vertices.
/// The first fitting is the reference; input order matters.
LandmarkSet resample_landmarks(const TriMesh& sphere, const std::vector<FittedTarget>& fittings,
                               const Eigen::VectorXd& weights);

}  // namespace densadapt
