#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace densadapt {

/// Per-vertex scalar data (N entries, aligned with mesh vertex order).
using ScalarField = Eigen::VectorXd;
/// Per-vertex 3D data (N x 3, aligned with mesh vertex order).
using VectorField = Eigen::MatrixX3d;

/// Triangle mesh with immutable connectivity and mutable vertex positions.
///
/// Faces are 0-based, counter-clockwise index triples. one_ring[i] is the
/// sorted list of vertices sharing an edge with i; it is derived once at
/// construction and never changes, so it is safe to share across threads
/// while a single owner updates positions.
struct TriMesh {
    Eigen::MatrixX3d positions;
    Eigen::MatrixX3i faces;
    std::vector<std::vector<int>> one_ring;

    int vertex_count() const { return static_cast<int>(positions.rows()); }
    int face_count() const { return static_cast<int>(faces.rows()); }
};

/// Validates faces and derives the one-ring adjacency.
/// Throws MeshError on out-of-range indices or faces with repeated vertices.
TriMesh build_mesh(const Eigen::MatrixX3d& positions, const Eigen::MatrixX3i& faces);

/// Icosahedron subdivided `subdivisions` times, vertices projected onto the
/// sphere of the given radius. Vertex count is 10*4^s + 2.
/// Throws ConfigError for subdivisions outside [0, 8].
TriMesh icosphere(int subdivisions, double radius = 1.0);

/// Area-weighted unit vertex normals (incident face cross products summed,
/// then normalized). A vertex whose accumulated normal has zero magnitude
/// gets the fixed substitute (0,0,1) and a warning on stderr.
VectorField vertex_normals(const TriMesh& mesh);

/// Reads an ASCII Wavefront OBJ. Only `v` and `f` records are interpreted;
/// `vn`, `vt`, comments, groups and material statements are ignored. Face
/// entries may carry `/`-separated attribute indices; polygons are fan
/// triangulated around their first vertex. Throws IoError with a line number
/// on malformed records.
TriMesh load_obj(const std::string& path);

/// Writes `v` lines (9 significant digits) followed by 1-based `f` lines.
void save_obj(const TriMesh& mesh, const std::string& path);

}  // namespace densadapt
