#include "densadapt/synthetic.hpp"

#include <cmath>

#include "densadapt/errors.hpp"
#include "densadapt/rng.hpp"

namespace densadapt {

SyntheticKind parse_synthetic_kind(const std::string& name)
{
    if (name == "sphere") return SyntheticKind::Sphere;
    if (name == "spiky_star") return SyntheticKind::SpikyStar;
    if (name == "bumpy_sphere") return SyntheticKind::BumpySphere;
    if (name == "face_blob") return SyntheticKind::FaceBlob;
    throw ConfigError("unknown synthetic kind: " + name);
}

namespace {

struct Bump {
    Eigen::Vector3d dir;  // unit axis
    double height;        // relative radial amplitude
    double sigma;         // angular width in radians
};

// Radial scale factor 1 + sum of Gaussian lobes in geodesic angle.
double bump_factor(const Eigen::Vector3d& unit, const std::vector<Bump>& bumps)
{
    double f = 1.0;
    for (const auto& b : bumps) {
        const double c = std::clamp(unit.dot(b.dir), -1.0, 1.0);
        const double theta = std::acos(c);
        f += b.height * std::exp(-theta * theta / (2.0 * b.sigma * b.sigma));
    }
    return f;
}

void displace(TriMesh& mesh, double radius, const std::vector<Bump>& bumps)
{
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Eigen::Vector3d unit = mesh.positions.row(i).transpose() / radius;
        mesh.positions.row(i) *= bump_factor(unit, bumps);
    }
}

Eigen::Vector3d random_unit(Rng& rng)
{
    const double z = uniform(rng, -1.0, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

std::vector<Eigen::Vector3d> bumpy_sphere_directions(std::uint64_t seed, int count)
{
    Rng rng(seed);
    std::vector<Eigen::Vector3d> dirs(count);
    for (auto& d : dirs) d = random_unit(rng);
    return dirs;
}

Eigen::MatrixX3d fibonacci_directions(int count)
{
    Eigen::MatrixX3d dirs(count, 3);
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (int b = 0; b < count; ++b) {
        const double z = 1.0 - 2.0 * (b + 0.5) / static_cast<double>(count);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * b;
        dirs.row(b) = Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
    }
    return dirs;
}

SyntheticShape make_synthetic(SyntheticKind kind, std::uint64_t seed, const SyntheticParams& params)
{
    SyntheticShape shape;
    shape.mesh = icosphere(params.subdivisions, params.radius);

    switch (kind) {
    case SyntheticKind::Sphere:
        break;

    case SyntheticKind::SpikyStar: {
        std::vector<Bump> bumps;
        for (int axis = 0; axis < 3; ++axis) {
            for (double sign : {1.0, -1.0}) {
                Bump b;
                b.dir = Eigen::Vector3d::Zero();
                b.dir[axis] = sign;
                b.height = params.bump_height;
                b.sigma = params.bump_sigma;
                bumps.push_back(b);
            }
        }
        if (params.bump_height != 0.0) {
            displace(shape.mesh, params.radius, bumps);
        }
        break;
    }

    case SyntheticKind::BumpySphere: {
        const auto dirs = bumpy_sphere_directions(seed, 12);
        Rng rng(seed + 0x9e3779b97f4a7c15ull);  // independent stream for magnitudes
        std::vector<Bump> bumps;
        for (const auto& d : dirs) {
            Bump b;
            b.dir = d;
            b.height = uniform(rng, 0.08, 0.25);
            b.sigma = uniform(rng, 0.15, 0.35);
            bumps.push_back(b);
        }
        displace(shape.mesh, params.radius, bumps);
        break;
    }

    case SyntheticKind::FaceBlob: {
        Rng rng(seed);
        std::vector<Bump> bumps;
        for (int k = 0; k < 6; ++k) {
            Bump b;
            b.dir = random_unit(rng);
            b.height = uniform(rng, 0.10, 0.30);
            b.sigma = uniform(rng, 0.35, 0.60);
            bumps.push_back(b);
        }
        displace(shape.mesh, params.radius, bumps);

        // The blob is a radial graph, so the surface point along a direction
        // d is exactly (radius * factor(d)) d.
        const Eigen::MatrixX3d dirs = fibonacci_directions(38);
        shape.landmarks.points.resize(dirs.rows(), 3);
        for (int b = 0; b < dirs.rows(); ++b) {
            const Eigen::Vector3d d = dirs.row(b);
            shape.landmarks.points.row(b) = d * params.radius * bump_factor(d, bumps);
        }
        shape.landmarks.weights = Eigen::VectorXd::Ones(dirs.rows());
        shape.has_landmarks = true;
        break;
    }
    }
    return shape;
}

}  // namespace densadapt
