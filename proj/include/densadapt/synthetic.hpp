#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densadapt/landmarks.hpp"
#include "densadapt/mesh.hpp"

namespace densadapt {

enum class SyntheticKind { Sphere, SpikyStar, BumpySphere, FaceBlob };

/// Accepts sphere | spiky_star | bumpy_sphere | face_blob.
SyntheticKind parse_synthetic_kind(const std::string& name);

struct SyntheticParams {
    int subdivisions = 4;
    double radius = 1.0;
    double bump_height = 0.5;  // spiky_star bump height, relative to radius
    double bump_sigma = 0.25;  // spiky_star bump angular width (radians)
};

struct SyntheticShape {
    TriMesh mesh;
    LandmarkSet landmarks;  // face_blob only
    bool has_landmarks = false;
};

/// Deterministic test shapes, all radial height fields over the icosphere so
/// connectivity always matches a plain icosphere at the same subdivision.
///   sphere        exact icosphere (seed unused)
///   spiky_star    six axis-aligned Gaussian bumps; height 0 gives the
///                 sphere bitwise (seed unused)
///   bumpy_sphere  twelve Gaussian bumps at seeded directions with seeded
///                 heights and widths
///   face_blob     smooth asymmetric blob from six broad seeded bumps, plus
///                 38 landmark points at fixed spiral directions
SyntheticShape make_synthetic(SyntheticKind kind, std::uint64_t seed,
                              const SyntheticParams& params = {});

/// Bump directions used by bumpy_sphere for a given seed, exposed so tests
/// can compare the curvature field on versus off the bumps.
std::vector<Eigen::Vector3d> bumpy_sphere_directions(std::uint64_t seed, int count = 12);

/// `count` unit directions on a Fibonacci spiral; fixed, not seeded, so the
/// same landmark b means the same semantic location on every generated blob.
Eigen::MatrixX3d fibonacci_directions(int count);

}  // namespace densadapt
