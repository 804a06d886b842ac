#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>

#include <cstdio>
#include <fstream>

#include "densadapt/errors.hpp"
#include "densadapt/landmarks.hpp"
#include "densadapt/mesh.hpp"
#include "densadapt/rng.hpp"

using namespace densadapt;

namespace {

Eigen::Matrix3d rotation(double angle, const Eigen::Vector3d& axis)
{
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::MatrixX3d random_cloud(int n, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixX3d x(n, 3);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a) x(i, a) = gaussian(rng);
    return x;
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("landmark file: point round trip with comments and weights defaulting to 1")
{
    TempFile f("lmk_points_tmp.txt");
    {
        std::ofstream out(f.path);
        out << "# three free-floating landmarks\n";
        out << "p 1 0 0\n";
        out << "p 0 2.5 0\n";
        out << "\n";
        out << "p 0 0 -3\n";
    }
    const LandmarkSet set = load_landmarks(f.path);
    REQUIRE(set.size() == 3);
    CHECK(set.indices.empty());
    CHECK(set.points(1, 1) == 2.5);
    CHECK(set.weights.size() == 3);
    CHECK(set.weights.minCoeff() == 1.0);

    TempFile g("lmk_points_out_tmp.txt");
    save_landmarks(g.path, set, {"round trip"});
    const LandmarkSet back = load_landmarks(g.path);
    REQUIRE(back.size() == 3);
    CHECK((back.points - set.points).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("landmark file: index form resolves against a mesh and round trips")
{
    const TriMesh sphere = icosphere(1);
    TempFile f("lmk_idx_tmp.txt");
    {
        std::ofstream out(f.path);
        out << "i 0\ni 5\ni 11\n";
    }
    const LandmarkSet set = load_landmarks(f.path, &sphere);
    REQUIRE(set.size() == 3);
    REQUIRE(set.indices == std::vector<int>{0, 5, 11});
    CHECK((set.points.row(1) - sphere.positions.row(5)).norm() == 0.0);

    TempFile g("lmk_idx_out_tmp.txt");
    save_landmarks(g.path, set);
    const LandmarkSet back = load_landmarks(g.path, &sphere);
    CHECK(back.indices == set.indices);
}

TEST_CASE("landmark file: malformed input names the line")
{
    const TriMesh sphere = icosphere(1);

    TempFile f("lmk_bad_tmp.txt");
    {
        std::ofstream out(f.path);
        out << "p 1 0 0\nq 2 2 2\n";
    }
    CHECK_THROWS_WITH_AS(load_landmarks(f.path), doctest::Contains(":2"), IoError);

    TempFile g("lmk_bad_idx_tmp.txt");
    {
        std::ofstream out(g.path);
        out << "i 99\n";
    }
    CHECK_THROWS_AS(load_landmarks(g.path, &sphere), IoError);   // out of range
    CHECK_THROWS_AS(load_landmarks(g.path), IoError);            // no mesh to resolve against

    CHECK_THROWS_AS(load_landmarks("does_not_exist_anywhere.txt"), IoError);
}

TEST_CASE("anchor weights emphasize exactly one entry")
{
    const Eigen::VectorXd w = anchor_weights(5, 2, 1e4);
    CHECK(w.size() == 5);
    CHECK(w(2) == 1e4);
    CHECK(w(0) == 1.0);
    CHECK(w.sum() == doctest::Approx(4.0 + 1e4));
    CHECK_THROWS_AS(anchor_weights(5, 7, 1e4), ConfigError);
    CHECK_THROWS_AS(anchor_weights(5, 2, 0.0), ConfigError);
}

TEST_CASE("binding picks the nearest vertex, first index on ties")
{
    Eigen::MatrixX3d pos(4, 3);
    pos << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0;
    Eigen::MatrixX3i faces(2, 3);
    faces << 0, 1, 2, 2, 1, 3;
    const TriMesh m = build_mesh(pos, faces);

    LandmarkSet set;
    set.points = Eigen::MatrixX3d(3, 3);
    set.points << 0.1, 0.1, 0.2,   // nearest vertex 0
                  0.9, 0.9, 0,     // nearest vertex 3
                  0.5, 0, 0;       // tie between 0 and 1: lowest index wins
    set.weights = Eigen::VectorXd::Ones(3);

    const std::vector<int> idx = bind_landmarks(m, set);
    CHECK(idx == std::vector<int>{0, 3, 0});
}

TEST_CASE("alignment: identity for already-aligned clouds")
{
    const Eigen::MatrixX3d x = random_cloud(12, 7);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(12);
    const Eigen::Matrix3d r = weighted_alignment(x, x, w);
    CHECK((r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("alignment: recovers a known rotation to high accuracy")
{
    const Eigen::MatrixX3d ref = random_cloud(15, 11);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(15);
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Vector3d axis(gaussian(rng), gaussian(rng), gaussian(rng));
        const double angle = uniform(rng, -1.5, 1.5);
        const Eigen::Matrix3d r0 = rotation(angle, axis);
        const Eigen::MatrixX3d moved = ref * r0.transpose();  // moved = R0 * ref

        const Eigen::Matrix3d r = weighted_alignment(moved, ref, w);
        CHECK((moved * r.transpose() - ref).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("alignment: reflection-shaped inputs still produce a proper rotation")
{
    // Mirror the reference; the best orthogonal map is a reflection, which the
    // determinant correction must replace with the closest proper rotation.
    const Eigen::MatrixX3d ref = random_cloud(10, 17);
    Eigen::MatrixX3d mirrored = ref;
    mirrored.col(2) *= -1.0;
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(10);
    const Eigen::Matrix3d r = weighted_alignment(mirrored, ref, w);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("alignment: returned rotation is a local optimum of the weighted residual")
{
    const Eigen::MatrixX3d ref = random_cloud(9, 19);
    const Eigen::Matrix3d r0 = rotation(0.8, Eigen::Vector3d(1, 2, 3));
    const Eigen::MatrixX3d moved = ref * r0.transpose();
    Eigen::VectorXd w(9);
    w << 1, 1, 1, 50, 1, 1, 2, 1, 1;

    const Eigen::Matrix3d r = weighted_alignment(moved, ref, w);
    const auto residual = [&](const Eigen::Matrix3d& rot) {
        return (w.asDiagonal() * (moved * rot.transpose() - ref)
                    .cwiseProduct(moved * rot.transpose() - ref))
            .sum();
    };
    const double best = residual(r);
    Rng rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        const Eigen::Vector3d axis(gaussian(rng), gaussian(rng), gaussian(rng));
        const Eigen::Matrix3d perturbed = rotation(1e-3, axis) * r;
        CHECK(residual(perturbed) >= best - 1e-12);
    }
}

TEST_CASE("alignment: a dominant weight pins the anchored landmark")
{
    const Eigen::MatrixX3d ref = random_cloud(8, 29);
    const Eigen::Matrix3d r0 = rotation(0.3, Eigen::Vector3d(0, 0, 1));
    Eigen::MatrixX3d moved = ref * r0.transpose();
    // Perturb everything except landmark 4, then anchor landmark 4 heavily.
    Rng rng(31);
    for (int i = 0; i < 8; ++i) {
        if (i == 4) continue;
        for (int a = 0; a < 3; ++a) moved(i, a) += 0.05 * gaussian(rng);
    }
    Eigen::VectorXd uniform = Eigen::VectorXd::Ones(8);
    const Eigen::Matrix3d r_uniform = weighted_alignment(moved, ref, uniform);
    const Eigen::Matrix3d r_anchor = weighted_alignment(moved, ref, anchor_weights(8, 4, 1e4));

    const double err_uniform = (moved.row(4) * r_uniform.transpose() - ref.row(4)).norm();
    const double err_anchor = (moved.row(4) * r_anchor.transpose() - ref.row(4)).norm();
    CHECK(err_anchor < err_uniform);
}

TEST_CASE("alignment: collinear landmarks are rejected")
{
    Eigen::MatrixX3d line(4, 3);
    line << 1, 0, 0, 2, 0, 0, 3, 0, 0, -1, 0, 0;
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(weighted_alignment(line, line, w), ConfigError);
    CHECK_THROWS_AS(weighted_alignment(Eigen::MatrixX3d(1, 3), Eigen::MatrixX3d(2, 3), w),
                    ConfigError);
}

TEST_CASE("resampling: a single fitting transfers its bound vertices directly")
{
    const TriMesh sphere = icosphere(2);

    // Fitted mesh: the sphere pushed radially outward, so nearest-vertex
    // binding is unambiguous and maps straight back to sphere indices.
    TriMesh fitted = sphere;
    fitted.positions *= 1.3;

    FittedTarget entry;
    entry.fitted = fitted;
    entry.landmarks.points = Eigen::MatrixX3d(3, 3);
    entry.landmarks.points.row(0) = fitted.positions.row(10);
    entry.landmarks.points.row(1) = fitted.positions.row(25);
    entry.landmarks.points.row(2) = fitted.positions.row(60);
    entry.landmarks.weights = Eigen::VectorXd::Ones(3);

    const LandmarkSet out = resample_landmarks(sphere, {entry}, Eigen::VectorXd::Ones(3));
    REQUIRE(out.indices == std::vector<int>{10, 25, 60});
    CHECK((out.points.row(0) - sphere.positions.row(10)).norm() == 0.0);
}

TEST_CASE("resampling: identical fittings agree with the single-fitting answer")
{
    const TriMesh sphere = icosphere(2);
    TriMesh fitted = sphere;
    fitted.positions *= 1.2;

    FittedTarget entry;
    entry.fitted = fitted;
    entry.landmarks.points = Eigen::MatrixX3d(4, 3);
    entry.landmarks.points.row(0) = fitted.positions.row(3);
    entry.landmarks.points.row(1) = fitted.positions.row(17);
    entry.landmarks.points.row(2) = fitted.positions.row(40);
    entry.landmarks.points.row(3) = fitted.positions.row(99);
    entry.landmarks.weights = Eigen::VectorXd::Ones(4);

    const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
    const LandmarkSet one = resample_landmarks(sphere, {entry}, w);
    const LandmarkSet four = resample_landmarks(sphere, {entry, entry, entry, entry}, w);
    CHECK(one.indices == four.indices);
}

TEST_CASE("resampling: a rotated duplicate fitting is aligned away before averaging")
{
    const TriMesh sphere = icosphere(2);
    TriMesh fitted = sphere;
    fitted.positions *= 1.15;

    FittedTarget a;
    a.fitted = fitted;
    a.landmarks.points = Eigen::MatrixX3d(4, 3);
    a.landmarks.points.row(0) = fitted.positions.row(3);
    a.landmarks.points.row(1) = fitted.positions.row(17);
    a.landmarks.points.row(2) = fitted.positions.row(40);
    a.landmarks.points.row(3) = fitted.positions.row(99);
    a.landmarks.weights = Eigen::VectorXd::Ones(4);

    // Same shape and landmarks, rigidly rotated. After alignment to the first
    // fitting its sphere-space landmark estimates coincide with a's, so the
    // average snaps to the same vertices.
    const Eigen::Matrix3d r0 = rotation(0.4, Eigen::Vector3d(1, 1, 0));
    FittedTarget b = a;
    b.fitted.positions = a.fitted.positions * r0.transpose();
    b.landmarks.points = a.landmarks.points * r0.transpose();

    const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
    const LandmarkSet ref = resample_landmarks(sphere, {a}, w);
    const LandmarkSet avg = resample_landmarks(sphere, {a, b}, w);
    CHECK(ref.indices == avg.indices);
}

TEST_CASE("resampling: input validation")
{
    const TriMesh sphere = icosphere(1);
    CHECK_THROWS_AS(resample_landmarks(sphere, {}, Eigen::VectorXd::Ones(3)), ConfigError);

    TriMesh fitted = sphere;
    fitted.positions *= 1.1;
    FittedTarget good;
    good.fitted = fitted;
    good.landmarks.points = Eigen::MatrixX3d(3, 3);
    good.landmarks.points.row(0) = fitted.positions.row(0);
    good.landmarks.points.row(1) = fitted.positions.row(4);
    good.landmarks.points.row(2) = fitted.positions.row(8);
    good.landmarks.weights = Eigen::VectorXd::Ones(3);

    FittedTarget short_set = good;
    short_set.landmarks.points = good.landmarks.points.topRows(2);
    short_set.landmarks.weights = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(resample_landmarks(sphere, {good, short_set}, Eigen::VectorXd::Ones(3)),
                    ConfigError);

    // Weight vector length must match the landmark count.
    CHECK_THROWS_AS(resample_landmarks(sphere, {good}, Eigen::VectorXd::Ones(5)), ConfigError);
}
