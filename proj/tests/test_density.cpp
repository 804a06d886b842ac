#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "densadapt/density.hpp"
#include "densadapt/errors.hpp"
#include "densadapt/rng.hpp"
#include "densadapt/synthetic.hpp"

using namespace densadapt;

namespace {

TriMesh jittered_sphere(int subdivisions, double amount, std::uint64_t seed)
{
    TriMesh m = icosphere(subdivisions);
    Rng rng(seed);
    for (int i = 0; i < m.vertex_count(); ++i) {
        for (int a = 0; a < 3; ++a) m.positions(i, a) += amount * gaussian(rng);
    }
    return m;
}

// Straightforward re-derivation of the per-vertex mean edge length.
ScalarField lengths_oracle(const TriMesh& m)
{
    ScalarField l = ScalarField::Zero(m.vertex_count());
    for (int i = 0; i < m.vertex_count(); ++i) {
        for (int j : m.one_ring[i]) {
            l[i] += (m.positions.row(i) - m.positions.row(j)).norm();
        }
        l[i] /= static_cast<double>(m.one_ring[i].size());
    }
    return l;
}

}  // namespace

TEST_CASE("mean edge lengths: regular tetrahedron has one shared value")
{
    Eigen::MatrixX3d p(4, 3);
    p << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
    Eigen::MatrixX3i f(4, 3);
    f << 0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2;
    const TriMesh m = build_mesh(p, f);

    const double edge = std::sqrt(8.0);  // all pairs differ in two coordinates by 2
    const ScalarField l = mean_edge_lengths(m);
    for (int i = 0; i < 4; ++i) {
        CHECK(l[i] == doctest::Approx(edge).epsilon(1e-14));
    }
    CHECK(mean_edge_length_scale(m) == doctest::Approx(edge).epsilon(1e-14));
}

TEST_CASE("mean edge lengths match the direct recomputation on an irregular mesh")
{
    const TriMesh m = jittered_sphere(2, 0.05, 21);
    const ScalarField l = mean_edge_lengths(m);
    const ScalarField o = lengths_oracle(m);
    CHECK((l - o).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adaptation energy is zero at the target and matches its formula")
{
    const TriMesh m = jittered_sphere(2, 0.03, 5);
    const ScalarField l = mean_edge_lengths(m);

    EdgeLengthTarget at_current{l, EdgeLengthTarget::Kind::Uniform};
    CHECK(adaptation_energy(m, at_current) == 0.0);

    Rng rng(6);
    ScalarField shifted = l;
    for (int i = 0; i < shifted.size(); ++i) shifted[i] += 0.01 * gaussian(rng);
    EdgeLengthTarget tgt{shifted, EdgeLengthTarget::Kind::Uniform};
    const double expected = (l - shifted).squaredNorm() / static_cast<double>(m.vertex_count());
    CHECK(adaptation_energy(m, tgt) == doctest::Approx(expected).epsilon(1e-13));

    EdgeLengthTarget wrong_size{ScalarField::Ones(3), EdgeLengthTarget::Kind::Uniform};
    CHECK_THROWS_AS(adaptation_energy(m, wrong_size), ConfigError);
    CHECK_THROWS_AS(adaptation_gradient(m, wrong_size), ConfigError);
}

TEST_CASE("adaptation gradient agrees with central differences")
{
    TriMesh m = jittered_sphere(1, 0.05, 9);
    EdgeLengthTarget tgt{ScalarField::Constant(m.vertex_count(), mean_edge_length_scale(m) * 0.8),
                         EdgeLengthTarget::Kind::Uniform};
    const VectorField g = adaptation_gradient(m, tgt);

    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < m.vertex_count(); ++i) {
        for (int a = 0; a < 3; ++a) {
            const double saved = m.positions(i, a);
            m.positions(i, a) = saved + h;
            const double ep = adaptation_energy(m, tgt);
            m.positions(i, a) = saved - h;
            const double em = adaptation_energy(m, tgt);
            m.positions(i, a) = saved;
            worst = std::max(worst, std::abs((ep - em) / (2 * h) - g(i, a)));
        }
    }
    CHECK(worst / g.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("adaptation gradient is translation invariant and rotation equivariant")
{
    const TriMesh m = jittered_sphere(2, 0.04, 33);
    EdgeLengthTarget tgt{ScalarField::Constant(m.vertex_count(), mean_edge_length_scale(m)),
                         EdgeLengthTarget::Kind::Uniform};
    const VectorField g = adaptation_gradient(m, tgt);

    // Edge-difference terms cancel pairwise, so columns sum to zero.
    CHECK(g.colwise().sum().cwiseAbs().maxCoeff() < 1e-12 * g.cwiseAbs().maxCoeff());

    // Energies depend on lengths only: translating changes nothing, rotating
    // rotates the gradient.
    TriMesh shifted = m;
    shifted.positions.rowwise() += Eigen::RowVector3d(3, -2, 0.5);
    CHECK((adaptation_gradient(shifted, tgt) - g).cwiseAbs().maxCoeff() < 1e-10);

    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(0.83, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    TriMesh rotated = m;
    rotated.positions = m.positions * r.transpose();
    CHECK((adaptation_gradient(rotated, tgt) - g * r.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("uniform target holds the global scale at every vertex")
{
    const TriMesh m = jittered_sphere(2, 0.02, 17);
    const EdgeLengthTarget tgt = uniform_target(m);
    CHECK(tgt.kind == EdgeLengthTarget::Kind::Uniform);
    const double scale = mean_edge_length_scale(m);
    CHECK((tgt.lengths.array() - scale).abs().maxCoeff() < 1e-15);
}

TEST_CASE("curvature magnitudes are dimensionless")
{
    const TriMesh m = make_synthetic(SyntheticKind::BumpySphere, 4).mesh;
    const SparseLaplacian L = build_laplacian(m);
    const ScalarField k = curvature_magnitudes(m, L);
    CHECK(k.minCoeff() >= 0.0);

    TriMesh doubled = m;
    doubled.positions *= 2.0;
    const ScalarField k2 = curvature_magnitudes(doubled, build_laplacian(doubled));
    CHECK((k2 - k).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("field smoothing matches a dense solve")
{
    const TriMesh m = icosphere(2);
    const SparseLaplacian L = build_laplacian(m);
    Rng rng(8);
    ScalarField k(m.vertex_count());
    for (int i = 0; i < k.size(); ++i) k[i] = std::abs(gaussian(rng));

    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(m.vertex_count(), m.vertex_count()) + Eigen::MatrixXd(L);
    const ScalarField dense = A.partialPivLu().solve(k);

    CHECK((smooth_field(k, L, 1.0) - dense).cwiseAbs().maxCoeff() < 1e-10);
    const DiffusionSystem smoother(L, 1.0);
    CHECK((smooth_field(k, smoother) - dense).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("adaptive target never exceeds current lengths")
{
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        SyntheticParams params;
        params.subdivisions = 3;
        const TriMesh m = make_synthetic(SyntheticKind::BumpySphere, seed, params).mesh;
        const SparseLaplacian L = build_laplacian(m);
        const EdgeLengthTarget tgt = adaptive_target(m, L);
        CHECK(tgt.kind == EdgeLengthTarget::Kind::Adaptive);

        const ScalarField l = mean_edge_lengths(m);
        CHECK(tgt.lengths.size() == l.size());
        bool bounded = true, some_shorter = false;
        for (int i = 0; i < l.size(); ++i) {
            bounded = bounded && tgt.lengths[i] <= l[i];
            some_shorter = some_shorter || tgt.lengths[i] < l[i];
        }
        CHECK(bounded);
        CHECK(some_shorter);  // above-average curvature exists somewhere
    }
}

TEST_CASE("adaptive target shortens only above-average-curvature vertices")
{
    const TriMesh m = make_synthetic(SyntheticKind::BumpySphere, 12).mesh;
    const SparseLaplacian L = build_laplacian(m);
    const DiffusionSystem smoother(L, 1.0);
    const ScalarField s = smooth_field(curvature_magnitudes(m, L), smoother);
    const double s_bar = s.mean();

    const EdgeLengthTarget tgt = adaptive_target(m, L, smoother);
    const ScalarField l = mean_edge_lengths(m);
    for (int i = 0; i < l.size(); ++i) {
        if (s[i] <= s_bar) {
            CHECK(tgt.lengths[i] == doctest::Approx(l[i]).epsilon(1e-14));
        } else {
            CHECK(tgt.lengths[i] == doctest::Approx(l[i] * s_bar / s[i]).epsilon(1e-12));
        }
    }
}
