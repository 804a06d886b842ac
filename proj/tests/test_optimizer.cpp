#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "densadapt/density.hpp"
#include "densadapt/errors.hpp"
#include "densadapt/mesh.hpp"
#include "densadapt/optimizer.hpp"
#include "densadapt/synthetic.hpp"

using namespace densadapt;

namespace {

TriMesh small_shape(SyntheticKind kind, std::uint64_t seed)
{
    SyntheticParams params;
    params.subdivisions = 2;
    return make_synthetic(kind, seed, params).mesh;
}

}  // namespace

TEST_CASE("schedule: exact breakpoints for the default length")
{
    const ScheduleConfig cfg{1.5, 1400};
    CHECK(schedule_weights(0, cfg) == std::pair(1.5, 0.0));
    CHECK(schedule_weights(349, cfg) == std::pair(1.5, 0.0));
    CHECK(schedule_weights(350, cfg) == std::pair(0.0, 3.0));
    CHECK(schedule_weights(699, cfg) == std::pair(0.0, 3.0));
    CHECK(schedule_weights(700, cfg) == std::pair(0.0, 0.0));
    CHECK(schedule_weights(1399, cfg) == std::pair(0.0, 0.0));
}

TEST_CASE("schedule: lengths not divisible by four stay exact")
{
    // T = 10: 4t < 10 holds for t <= 2, 2t < 10 for t <= 4.
    const ScheduleConfig cfg{2.0, 10};
    CHECK(schedule_weights(2, cfg) == std::pair(2.0, 0.0));
    CHECK(schedule_weights(3, cfg) == std::pair(0.0, 4.0));
    CHECK(schedule_weights(4, cfg) == std::pair(0.0, 4.0));
    CHECK(schedule_weights(5, cfg) == std::pair(0.0, 0.0));
}

TEST_CASE("schedule: rejects nonsense configurations")
{
    CHECK_THROWS_AS(schedule_weights(-1, ScheduleConfig{1.0, 100}), ConfigError);
    CHECK_THROWS_AS(schedule_weights(0, ScheduleConfig{1.0, 0}), ConfigError);
}

TEST_CASE("shared-moment step: first update matches the closed form")
{
    Eigen::MatrixX3d u0(2, 3);
    u0 << 1, 2, 3, 4, 5, 6;
    OptimizerState s = make_optimizer_state(u0, 0.1);

    Eigen::MatrixX3d g(2, 3);
    g << 1, -2, 0, 0.5, 0, 4;  // max |entry| = 4
    uniform_step(s, g);

    // After one step: m1 = (1-b1) g, m2 = (1-b2) 16, both bias corrections
    // cancel the (1-b) factors, so the update is step * g / (4 + eps).
    const Eigen::MatrixX3d expected = u0 - (0.1 / (4.0 + 1e-8)) * g;
    CHECK((s.u - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(s.t == 1);

    // Second step with the same gradient: work the recursion by hand.
    uniform_step(s, g);
    const double m1c = (0.9 * 0.1 + 0.1) / (1 - 0.81);           // per unit of g
    const double m2c = (0.999 * 16 * 0.001 + 0.001 * 16) / (1 - 0.999 * 0.999);
    const Eigen::MatrixX3d expected2 =
        expected - (0.1 * m1c / (std::sqrt(m2c) + 1e-8)) * g;
    CHECK((s.u - expected2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("shared-moment step preserves gradient direction, per-coordinate does not")
{
    Eigen::MatrixX3d g(2, 3);
    g << 1, -2, 0, 0.5, 0, 4;

    OptimizerState shared = make_optimizer_state(Eigen::MatrixX3d::Zero(2, 3), 1e-2);
    uniform_step(shared, g);
    const Eigen::MatrixX3d d_shared = -shared.u;
    // Every coordinate moved by the same multiple of its gradient entry.
    const double ratio = d_shared(0, 0) / g(0, 0);
    for (int i = 0; i < 2; ++i)
        for (int a = 0; a < 3; ++a)
            if (g(i, a) != 0.0) CHECK(d_shared(i, a) / g(i, a) == doctest::Approx(ratio).epsilon(1e-12));

    OptimizerState percoord = make_optimizer_state(Eigen::MatrixX3d::Zero(2, 3), 1e-2);
    percoord.per_coordinate = true;
    uniform_step(percoord, g);
    const Eigen::MatrixX3d d_pc = -percoord.u;
    // Plain Adam normalizes per coordinate: unequal gradient entries move equally.
    CHECK(std::abs(d_pc(0, 0)) == doctest::Approx(std::abs(d_pc(1, 2))).epsilon(1e-6));
    CHECK(std::abs(d_shared(0, 0)) * 2 < std::abs(d_shared(1, 2)));
}

TEST_CASE("non-finite gradients are rejected")
{
    OptimizerState s = make_optimizer_state(Eigen::MatrixX3d::Zero(2, 3), 1e-2);
    Eigen::MatrixX3d g = Eigen::MatrixX3d::Zero(2, 3);
    g(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(uniform_step(s, g), SolverError);
    g(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(uniform_step(s, g), SolverError);
}

TEST_CASE("fit: a template already on the target only hovers at step-size scale")
{
    // The normalized step keeps its full length even when the gradient is
    // numerical noise, so an exact self-fit is not a bitwise fixed point; the
    // mesh must instead stay pinned to the target within optimizer hover.
    const TriMesh sphere = icosphere(2);
    FitConfig cfg;
    cfg.iterations = 25;
    cfg.m = 0.0;  // no density redistribution, so the data terms alone decide
    FitResult r = fit(sphere, sphere, cfg);

    CHECK(r.mesh.faces == sphere.faces);
    CHECK((r.mesh.positions - sphere.positions).cwiseAbs().maxCoeff() < 0.02);
    for (const auto& row : r.trace) {
        CHECK(row.chamfer < 5e-3);
    }
}

TEST_CASE("a bitwise-zero gradient leaves the optimizer state untouched")
{
    Eigen::MatrixX3d u0(3, 3);
    u0 << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    OptimizerState s = make_optimizer_state(u0, 1e-2);
    for (int k = 0; k < 5; ++k) uniform_step(s, Eigen::MatrixX3d::Zero(3, 3));
    CHECK(s.u == u0);
}

TEST_CASE("fit: bitwise deterministic across runs and thread counts")
{
    const TriMesh tmpl = icosphere(2);
    const TriMesh target = small_shape(SyntheticKind::SpikyStar, 2);
    FitConfig cfg;
    cfg.iterations = 40;

    cfg.threads = 2;
    FitResult a = fit(tmpl, target, cfg);
    FitResult b = fit(tmpl, target, cfg);
    cfg.threads = 1;
    FitResult c = fit(tmpl, target, cfg);

    CHECK(a.mesh.positions == b.mesh.positions);
    CHECK(a.mesh.positions == c.mesh.positions);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].e_data == b.trace[i].e_data);
        CHECK(a.trace[i].e_adapt_uniform == b.trace[i].e_adapt_uniform);
        CHECK(a.trace[i].e_adapt_curvature == b.trace[i].e_adapt_curvature);
        CHECK(a.trace[i].edge_len_cv == b.trace[i].edge_len_cv);
    }
}

TEST_CASE("fit: connectivity is untouched and the data term decreases")
{
    const TriMesh tmpl = icosphere(2);
    const TriMesh target = small_shape(SyntheticKind::BumpySphere, 7);
    FitConfig cfg;
    cfg.iterations = 120;
    FitResult r = fit(tmpl, target, cfg);

    CHECK(r.mesh.faces == tmpl.faces);
    REQUIRE(r.trace.size() == 120);
    CHECK(r.trace.back().e_data < 0.25 * r.trace.front().e_data);
    CHECK(r.mesh.positions.allFinite());
}

TEST_CASE("fit: landmark tether pulls the flagged vertex and reports its energy")
{
    const TriMesh tmpl = icosphere(2);
    const TriMesh target = icosphere(2, 1.05);

    LandmarkConstraint lmk;
    lmk.template_indices = {0};
    lmk.target_points = Eigen::MatrixX3d(1, 3);
    lmk.target_points << 0, 0, 1.05;

    FitConfig cfg;
    cfg.iterations = 60;
    FitResult with = fit(tmpl, target, cfg, lmk);
    REQUIRE(!with.trace.empty());
    CHECK(with.trace.front().e_landmark > 0.0);
    CHECK(with.trace.back().e_landmark < with.trace.front().e_landmark);

    FitResult without = fit(tmpl, target, cfg);
    for (const auto& row : without.trace) CHECK(row.e_landmark == 0.0);
}

TEST_CASE("fit: smoothness baselines run and leave the adaptation channels silent")
{
    const TriMesh tmpl = icosphere(2);
    const TriMesh target = icosphere(2, 1.1);
    FitConfig cfg;
    cfg.iterations = 15;
    cfg.baseline = BaselineMode::Laplacian;
    cfg.baseline_weight = 0.5;
    FitResult lap = fit(tmpl, target, cfg);
    CHECK(lap.mesh.positions.allFinite());
    for (const auto& row : lap.trace) {
        CHECK(row.w_u == 0.0);
        CHECK(row.w_k == 0.0);
    }

    cfg.baseline = BaselineMode::Bilaplacian;
    FitResult bil = fit(tmpl, target, cfg);
    CHECK(bil.mesh.positions.allFinite());
    CHECK(bil.mesh.positions != lap.mesh.positions);
}

TEST_CASE("fit: configuration validation")
{
    const TriMesh sphere = icosphere(1);
    FitConfig cfg;
    cfg.iterations = 0;
    CHECK_THROWS_AS(fit(sphere, sphere, cfg), ConfigError);
    cfg.iterations = 10;
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(fit(sphere, sphere, cfg), ConfigError);
    cfg.lambda = 19.0;
    cfg.threads = 0;
    CHECK_THROWS_AS(fit(sphere, sphere, cfg), ConfigError);
}

TEST_CASE("adaptation-only optimization drives the energy down")
{
    SyntheticParams params;
    params.subdivisions = 3;
    const TriMesh start = make_synthetic(SyntheticKind::SpikyStar, 3, params).mesh;
    const EdgeLengthTarget tgt = uniform_target(start);

    FitConfig cfg;
    cfg.iterations = 200;
    cfg.m = 1.5;
    FitResult r = optimize_adaptation_only(start, tgt.lengths, cfg);

    const double e0 = adaptation_energy(start, tgt);
    EdgeLengthTarget tgt_end;
    tgt_end.lengths = tgt.lengths;
    const double e1 = adaptation_energy(r.mesh, tgt_end);
    CHECK(e1 < 0.2 * e0);
    CHECK(r.mesh.faces == start.faces);
}

TEST_CASE("metrics CSV: exact header and one row per iteration")
{
    std::vector<IterationMetrics> trace(3);
    for (int i = 0; i < 3; ++i) {
        trace[i].iter = i;
        trace[i].e_data = 0.5 * i;
        trace[i].w_u = 1.5;
        trace[i].wall_ms = 0.125;
    }
    const std::string path = "metrics_test_tmp.csv";
    save_metrics_csv(trace, path);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "iter,E_d,D_c,D_n,E_a_u,E_a_k,E_lmk,w_u,w_k,edge_len_mean,edge_len_cv,wall_ms");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    in.close();
    std::remove(path.c_str());
}
