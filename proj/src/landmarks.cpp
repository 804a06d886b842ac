#include "densadapt/landmarks.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "densadapt/errors.hpp"

namespace densadapt {

LandmarkSet load_landmarks(const std::string& path, const TriMesh* mesh)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open landmark file: " + path);
    }

    std::vector<Eigen::Vector3d> points;
    std::vector<int> indices;
    bool all_bound = true;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        const auto fail = [&](const std::string& what) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": " << what;
            return IoError(msg.str());
        };
        if (tag == "i") {
            long idx;
            if (!(ls >> idx)) {
                throw fail("expected a vertex index after 'i'");
            }
            if (!mesh) {
                throw fail("indexed landmark requires a mesh to resolve against");
            }
            if (idx < 0 || idx >= mesh->vertex_count()) {
                throw fail("vertex index out of range");
            }
            points.emplace_back(mesh->positions.row(idx));
            indices.push_back(static_cast<int>(idx));
        } else if (tag == "p") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) {
                throw fail("expected three coordinates after 'p'");
            }
            points.emplace_back(x, y, z);
            indices.push_back(-1);
            all_bound = false;
        } else {
            throw fail("unknown landmark record '" + tag + "'");
        }
    }
    if (points.empty()) {
        throw IoError("landmark file contains no landmarks: " + path);
    }

    LandmarkSet set;
    set.points.resize(points.size(), 3);
    for (size_t b = 0; b < points.size(); ++b) {
        set.points.row(b) = points[b];
    }
    set.weights = Eigen::VectorXd::Ones(points.size());
    if (all_bound) {
        set.indices = std::move(indices);
    }
    return set;
}

void save_landmarks(const std::string& path, const LandmarkSet& set,
                    const std::vector<std::string>& header)
{
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        throw IoError("cannot open landmark file for writing: " + path);
    }
    for (const auto& h : header) {
        std::fprintf(f, "# %s\n", h.c_str());
    }
    const bool bound = static_cast<int>(set.indices.size()) == set.size();
    for (int b = 0; b < set.size(); ++b) {
        if (bound) {
            std::fprintf(f, "i %d\n", set.indices[b]);
        } else {
            std::fprintf(f, "p %.17g %.17g %.17g\n", set.points(b, 0), set.points(b, 1),
                         set.points(b, 2));
        }
    }
    std::fclose(f);
}

Eigen::VectorXd anchor_weights(int count, int anchor_index, double anchor_weight)
{
    if (count <= 0) {
        throw ConfigError("landmark count must be positive");
    }
    if (anchor_index < 0 || anchor_index >= count) {
        throw ConfigError("anchor landmark index out of range");
    }
    if (anchor_weight <= 0.0) {
        throw ConfigError("anchor weight must be positive");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(count);
    w[anchor_index] = anchor_weight;
    return w;
}

namespace {

int nearest_vertex(const TriMesh& mesh, const Eigen::Vector3d& q)
{
    int best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const double d = (mesh.positions.row(i).transpose() - q).squaredNorm();
        if (d < best_sq) {
            best_sq = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

std::vector<int> bind_landmarks(const TriMesh& fitted, const LandmarkSet& target_landmarks)
{
    std::vector<int> bound(target_landmarks.size());
    for (int b = 0; b < target_landmarks.size(); ++b) {
        bound[b] = nearest_vertex(fitted, target_landmarks.points.row(b));
    }
    std::set<int> unique(bound.begin(), bound.end());
    if (unique.size() != bound.size()) {
        std::fprintf(stderr, "warning: %zu landmark(s) share a nearest vertex\n",
                     bound.size() - unique.size());
    }
    return bound;
}

Eigen::Matrix3d weighted_alignment(const Eigen::MatrixX3d& points,
                                   const Eigen::MatrixX3d& reference,
                                   const Eigen::VectorXd& weights)
{
    const Eigen::Index b = points.rows();
    if (b == 0 || reference.rows() != b || weights.size() != b) {
        throw ConfigError("landmark sets and weights must have equal nonzero counts");
    }
    if ((weights.array() <= 0.0).any()) {
        throw ConfigError("landmark weights must be positive");
    }

    const Eigen::Matrix3d cross = points.transpose() * weights.asDiagonal() * reference;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    // Rank < 2 (collinear or zero landmarks) leaves a free rotation axis.
    if (!(sv[1] > sv[0] * 1e-12)) {
        throw ConfigError("degenerate landmark configuration: alignment rotation is not unique");
    }

    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant();
    return svd.matrixV() * d * svd.matrixU().transpose();
}

LandmarkSet resample_landmarks(const TriMesh& sphere, const std::vector<FittedTarget>& fittings,
                               const Eigen::VectorXd& weights)
{
    if (fittings.empty()) {
        throw ConfigError("landmark resampling needs at least one fitting");
    }
    const int b = fittings.front().landmarks.size();
    for (const auto& f : fittings) {
        if (f.landmarks.size() != b) {
            throw ConfigError("all fittings must carry the same number of landmarks");
        }
        if (f.fitted.vertex_count() != sphere.vertex_count()) {
            throw ConfigError("fitted mesh vertex count does not match the template sphere");
        }
    }
    if (weights.size() != b) {
        throw ConfigError("weight count does not match landmark count");
    }

    // Per fitting: landmarks -> nearest fitted vertices -> coordinates of
    // those vertices on the undeformed sphere.
    std::vector<Eigen::MatrixX3d> on_sphere;
    on_sphere.reserve(fittings.size());
    for (const auto& f : fittings) {
        const std::vector<int> bound = bind_landmarks(f.fitted, f.landmarks);
        Eigen::MatrixX3d c(b, 3);
        for (int k = 0; k < b; ++k) {
            c.row(k) = sphere.positions.row(bound[k]);
        }
        on_sphere.push_back(std::move(c));
    }

    // Align everything to the first fitting, then average.
    Eigen::MatrixX3d mean = on_sphere.front();
    for (size_t m = 1; m < on_sphere.size(); ++m) {
        const Eigen::Matrix3d r = weighted_alignment(on_sphere[m], on_sphere.front(), weights);
        mean += on_sphere[m] * r.transpose();
    }
    mean /= static_cast<double>(on_sphere.size());

    LandmarkSet out;
    out.points.resize(b, 3);
    out.weights = weights;
    out.indices.resize(b);
    for (int k = 0; k < b; ++k) {
        const int idx = nearest_vertex(sphere, mean.row(k));
        out.indices[k] = idx;
        out.points.row(k) = sphere.positions.row(idx);
    }
    return out;
}

}  // namespace densadapt
