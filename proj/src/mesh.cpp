#include "densadapt/mesh.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "densadapt/errors.hpp"

namespace densadapt {

TriMesh build_mesh(const Eigen::MatrixX3d& positions, const Eigen::MatrixX3i& faces) {
    const int n = static_cast<int>(positions.rows());
    const int f = static_cast<int>(faces.rows());

    for (int k = 0; k < f; ++k) {
        int a = faces(k, 0), b = faces(k, 1), c = faces(k, 2);
        if (a < 0 || a >= n || b < 0 || b >= n || c < 0 || c >= n)
            throw MeshError("face " + std::to_string(k) + " references vertex out of range");
        if (a == b || b == c || a == c)
            throw MeshError("face " + std::to_string(k) + " has repeated vertices");
    }

    TriMesh mesh;
    mesh.positions = positions;
    mesh.faces = faces;
    mesh.one_ring.assign(n, {});
    for (int k = 0; k < f; ++k) {
        for (int e = 0; e < 3; ++e) {
            int i = faces(k, e);
            int j = faces(k, (e + 1) % 3);
            mesh.one_ring[i].push_back(j);
            mesh.one_ring[j].push_back(i);
        }
    }
    for (auto& ring : mesh.one_ring) {
        std::sort(ring.begin(), ring.end());
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    }
    return mesh;
}

TriMesh icosphere(int subdivisions, double radius) {
    if (subdivisions < 0 || subdivisions > 8)
        throw ConfigError("icosphere subdivisions must be in [0, 8], got " +
                          std::to_string(subdivisions));

    // Icosahedron from three orthogonal golden rectangles.
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    std::vector<std::array<int, 3>> tris = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back(0.5 * (verts[a] + verts[b]));
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 4);
        for (const auto& tr : tris) {
            int ab = mid(tr[0], tr[1]);
            int bc = mid(tr[1], tr[2]);
            int ca = mid(tr[2], tr[0]);
            next.push_back({tr[0], ab, ca});
            next.push_back({tr[1], bc, ab});
            next.push_back({tr[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    Eigen::MatrixX3d positions(static_cast<int>(verts.size()), 3);
    for (int i = 0; i < positions.rows(); ++i)
        positions.row(i) = (radius / verts[i].norm()) * verts[i];
    Eigen::MatrixX3i faces(static_cast<int>(tris.size()), 3);
    for (int k = 0; k < faces.rows(); ++k)
        faces.row(k) << tris[k][0], tris[k][1], tris[k][2];
    return build_mesh(positions, faces);
}

VectorField vertex_normals(const TriMesh& mesh) {
    const int n = mesh.vertex_count();
    VectorField accum = VectorField::Zero(n, 3);
    for (int k = 0; k < mesh.face_count(); ++k) {
        int a = mesh.faces(k, 0), b = mesh.faces(k, 1), c = mesh.faces(k, 2);
        Eigen::Vector3d cross =
            (mesh.positions.row(b) - mesh.positions.row(a))
                .cross(mesh.positions.row(c) - mesh.positions.row(a));
        accum.row(a) += cross;
        accum.row(b) += cross;
        accum.row(c) += cross;
    }
    int degenerate = 0;
    for (int i = 0; i < n; ++i) {
        double len = accum.row(i).norm();
        if (len < 1e-300) {
            accum.row(i) << 0.0, 0.0, 1.0;
            ++degenerate;
        } else {
            accum.row(i) /= len;
        }
    }
    if (degenerate > 0)
        std::fprintf(stderr,
                     "warning: %d vertex normal(s) degenerate, substituted (0,0,1)\n",
                     degenerate);
    return accum;
}

namespace {

// Leading integer of a face token such as "7", "7/2" or "7//3".
bool parse_face_index(const std::string& token, long& out) {
    size_t slash = token.find('/');
    std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    if (head.empty()) return false;
    char* end = nullptr;
    out = std::strtol(head.c_str(), &end, 10);
    return end != nullptr && *end == '\0';
}

}  // namespace

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OBJ file: " + path);

    std::vector<Eigen::Vector3d> verts;
    std::vector<std::array<int, 3>> tris;

    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z))
                throw IoError(path + ":" + std::to_string(lineno) + ": malformed vertex record");
            verts.push_back({x, y, z});
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string token;
            while (ss >> token) {
                long idx;
                if (!parse_face_index(token, idx) || idx <= 0 ||
                    idx > static_cast<long>(verts.size()))
                    throw IoError(path + ":" + std::to_string(lineno) +
                                  ": malformed face index '" + token + "'");
                poly.push_back(static_cast<int>(idx - 1));
            }
            if (poly.size() < 3)
                throw IoError(path + ":" + std::to_string(lineno) +
                              ": face with fewer than 3 vertices");
            for (size_t i = 1; i + 1 < poly.size(); ++i)
                tris.push_back({poly[0], poly[i], poly[i + 1]});
        }
        // vn, vt, o, g, s, mtllib, usemtl and anything else: ignored.
    }

    Eigen::MatrixX3d positions(static_cast<int>(verts.size()), 3);
    for (int i = 0; i < positions.rows(); ++i) positions.row(i) = verts[i];
    Eigen::MatrixX3i faces(static_cast<int>(tris.size()), 3);
    for (int k = 0; k < faces.rows(); ++k)
        faces.row(k) << tris[k][0], tris[k][1], tris[k][2];
    return build_mesh(positions, faces);
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw IoError("cannot open for writing: " + path);
    for (int i = 0; i < mesh.vertex_count(); ++i)
        std::fprintf(out, "v %.17g %.17g %.17g\n", mesh.positions(i, 0), mesh.positions(i, 1),
                     mesh.positions(i, 2));
    for (int k = 0; k < mesh.face_count(); ++k)
        std::fprintf(out, "f %d %d %d\n", mesh.faces(k, 0) + 1, mesh.faces(k, 1) + 1,
                     mesh.faces(k, 2) + 1);
    if (std::fclose(out) != 0) throw IoError("write failed: " + path);
}

}  // namespace densadapt
