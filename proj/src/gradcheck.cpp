#include "densadapt/gradcheck.hpp"

#include <cmath>
#include <memory>

#include "densadapt/closest_point.hpp"
#include "densadapt/density.hpp"
#include "densadapt/landmarks.hpp"
#include "densadapt/laplacian.hpp"
#include "densadapt/losses.hpp"
#include "densadapt/rng.hpp"
#include "densadapt/synthetic.hpp"

namespace densadapt {

GradCheckReport check_gradient(const EnergyProbe& probe, double h)
{
    const Eigen::MatrixX3d analytic = probe.gradient(probe.x0);

    GradCheckReport report;
    report.name = probe.name;

    double worst_abs = 0.0;
    Eigen::MatrixX3d x = probe.x0;
    for (int i = 0; i < x.rows(); ++i) {
        for (int a = 0; a < 3; ++a) {
            const double saved = x(i, a);
            x(i, a) = saved + h;
            const double ep = probe.energy(x);
            x(i, a) = saved - h;
            const double em = probe.energy(x);
            x(i, a) = saved;

            const double fd = (ep - em) / (2.0 * h);
            const double diff = std::abs(fd - analytic(i, a));
            if (diff > worst_abs) {
                worst_abs = diff;
                report.worst_vertex = i;
                report.worst_axis = a;
            }
        }
    }
    const double scale = std::max(1e-12, analytic.cwiseAbs().maxCoeff());
    report.max_rel_error = worst_abs / scale;
    return report;
}

namespace {

TriMesh with_positions(const TriMesh& base, const Eigen::MatrixX3d& x)
{
    TriMesh m = base;
    m.positions = x;
    return m;
}

}  // namespace

std::vector<EnergyProbe> standard_probes(std::uint64_t seed, int subdivisions)
{
    // Irregular source strictly inside the target keeps every closest-point
    // query away from the zero-distance kink of the unsquared distance.
    auto source = std::make_shared<TriMesh>(icosphere(subdivisions, 0.8));
    {
        Rng rng(seed);
        for (int i = 0; i < source->vertex_count(); ++i) {
            for (int a = 0; a < 3; ++a) {
                source->positions(i, a) += 0.01 * gaussian(rng);
            }
        }
    }
    SyntheticParams tp;
    tp.subdivisions = subdivisions + 1;
    tp.radius = 1.2;
    const TriMesh target = make_synthetic(SyntheticKind::BumpySphere, seed, tp).mesh;

    const auto L = std::make_shared<SparseLaplacian>(build_laplacian(*source));
    const auto index = std::make_shared<SurfaceIndex>(target);
    const auto corr = std::make_shared<Correspondence>(closest_points(*index, source->positions));

    // Frozen adaptation target: halfway between current lengths and uniform,
    // so the residual (and hence the gradient) is nonzero.
    auto tgt = std::make_shared<EdgeLengthTarget>();
    {
        const ScalarField l = mean_edge_lengths(*source);
        tgt->lengths = 0.5 * (l.array() + l.mean()).matrix();
        tgt->kind = EdgeLengthTarget::Kind::Uniform;
    }

    // Landmark tether on a few vertices, targets offset off the surface.
    auto lmk_idx = std::make_shared<std::vector<int>>();
    auto lmk_pts = std::make_shared<Eigen::MatrixX3d>();
    {
        Rng rng(seed + 1);
        const int b = 7;
        lmk_pts->resize(b, 3);
        for (int k = 0; k < b; ++k) {
            const int idx = static_cast<int>(uniform_index(rng, source->vertex_count()));
            lmk_idx->push_back(idx);
            lmk_pts->row(k) = source->positions.row(idx) * 1.1;
        }
    }

    std::vector<EnergyProbe> probes;

    probes.push_back({"adaptation", source->positions,
                      [=](const Eigen::MatrixX3d& x) {
                          return adaptation_energy(with_positions(*source, x), *tgt);
                      },
                      [=](const Eigen::MatrixX3d& x) {
                          return adaptation_gradient(with_positions(*source, x), *tgt);
                      }});

    probes.push_back({"laplacian", source->positions,
                      [=](const Eigen::MatrixX3d& x) { return laplacian_energy(*L, x); },
                      [=](const Eigen::MatrixX3d& x) { return laplacian_energy_gradient(*L, x); }});

    probes.push_back({"squared_laplacian", source->positions,
                      [=](const Eigen::MatrixX3d& x) { return bilaplacian_energy(*L, x); },
                      [=](const Eigen::MatrixX3d& x) { return bilaplacian_energy_gradient(*L, x); }});

    probes.push_back({"closest_point_distance", source->positions,
                      [=](const Eigen::MatrixX3d& x) { return chamfer_loss(x, *corr); },
                      [=](const Eigen::MatrixX3d& x) { return chamfer_loss_gradient(x, *corr); }});

    probes.push_back({"normal_agreement", source->positions,
                      [=](const Eigen::MatrixX3d& x) {
                          return normal_loss(with_positions(*source, x), *corr);
                      },
                      [=](const Eigen::MatrixX3d& x) {
                          return normal_loss_gradient(with_positions(*source, x), *corr);
                      }});

    probes.push_back({"landmark", source->positions,
                      [=](const Eigen::MatrixX3d& x) {
                          return landmark_loss(x, *lmk_idx, *lmk_pts);
                      },
                      [=](const Eigen::MatrixX3d& x) {
                          return landmark_loss_gradient(x, *lmk_idx, *lmk_pts);
                      }});

    // Same energies as functions of u through p(u) = (I + lambda L)^{-1} u;
    // the analytic gradient is the transpose solve of the inner gradient.
    const auto diffusion = std::make_shared<DiffusionSystem>(*L, 19.0);
    const Eigen::MatrixX3d u0 = diffusion->apply(source->positions);
    std::vector<EnergyProbe> pulled;
    pulled.reserve(probes.size());
    for (const auto& p : probes) {
        EnergyProbe q;
        q.name = p.name + "_through_pullback";
        q.x0 = u0;
        q.energy = [=, e = p.energy](const Eigen::MatrixX3d& u) { return e(diffusion->solve(u)); };
        q.gradient = [=, g = p.gradient](const Eigen::MatrixX3d& u) {
            return diffusion->solve_transpose(g(diffusion->solve(u)));
        };
        pulled.push_back(std::move(q));
    }
    for (auto& q : pulled) {
        probes.push_back(std::move(q));
    }
    return probes;
}

std::vector<GradCheckReport> run_gradcheck(std::uint64_t seed, double h, int subdivisions)
{
    std::vector<GradCheckReport> reports;
    for (const auto& probe : standard_probes(seed, subdivisions)) {
        reports.push_back(check_gradient(probe, h));
    }
    return reports;
}

}  // namespace densadapt
