#pragma once

#include <vector>

#include "densadapt/closest_point.hpp"
#include "densadapt/mesh.hpp"

namespace densadapt {

/// Mean distance to the frozen closest points: D_c = (1/N) sum |p_i - phat_i|.
/// The correspondence is refreshed once per optimization iteration and held
/// constant inside the gradient, so the gradient per vertex is the unit
/// offset direction scaled by 1/N (zero below the 1e-12 kink guard).
double chamfer_loss(const Eigen::MatrixX3d& p, const Correspondence& corr);
VectorField chamfer_loss_gradient(const Eigen::MatrixX3d& p, const Correspondence& corr);

/// Normal agreement term D_n = (1/N) sum (1 - n_i . nhat_i), where n_i is
/// the area-weighted unit vertex normal of the deforming mesh (a function of
/// the positions; the gradient flows through it) and nhat_i is the frozen
/// interpolated target normal. A vertex with a degenerate source normal
/// contributes the constant 1 with zero gradient.
double normal_loss(const TriMesh& mesh, const Correspondence& corr);
VectorField normal_loss_gradient(const TriMesh& mesh, const Correspondence& corr);

/// Squared landmark tether: (1/B) sum |p[index_b] - k_b|^2.
/// Throws ConfigError on an out-of-range index or an empty landmark list.
double landmark_loss(const Eigen::MatrixX3d& p, const std::vector<int>& indices,
                     const Eigen::MatrixX3d& targets);
VectorField landmark_loss_gradient(const Eigen::MatrixX3d& p, const std::vector<int>& indices,
                                   const Eigen::MatrixX3d& targets);

}  // namespace densadapt
