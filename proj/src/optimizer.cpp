#include "densadapt/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "densadapt/closest_point.hpp"
#include "densadapt/density.hpp"
#include "densadapt/errors.hpp"
#include "densadapt/laplacian.hpp"
#include "densadapt/losses.hpp"

namespace densadapt {

std::pair<double, double> schedule_weights(int t, const ScheduleConfig& cfg)
{
    if (cfg.total_iterations <= 0) {
        throw ConfigError("schedule needs a positive iteration count");
    }
    if (t < 0) {
        throw ConfigError("schedule iteration index must be non-negative");
    }
    // 4t < T is exact integer arithmetic for t < T/4, robust for any T.
    const long long t4 = 4LL * t;
    const long long t2 = 2LL * t;
    const long long T = cfg.total_iterations;
    if (t4 < T) {
        return {cfg.m, 0.0};
    }
    if (t2 < T) {
        return {0.0, 2.0 * cfg.m};
    }
    return {0.0, 0.0};
}

OptimizerState make_optimizer_state(const Eigen::MatrixX3d& u0, double step_size)
{
    OptimizerState s;
    s.u = u0;
    s.m1 = Eigen::MatrixX3d::Zero(u0.rows(), 3);
    s.m2_elementwise = Eigen::MatrixX3d::Zero(u0.rows(), 3);
    s.step_size = step_size;
    return s;
}

void uniform_step(OptimizerState& state, const Eigen::MatrixX3d& grad_u)
{
    if (!grad_u.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite gradient at step " << state.t + 1;
        throw SolverError(msg.str());
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, state.t);
    const double bc2 = 1.0 - std::pow(state.beta2, state.t);

    state.m1 = state.beta1 * state.m1 + (1.0 - state.beta1) * grad_u;

    if (state.per_coordinate) {
        state.m2_elementwise = state.beta2 * state.m2_elementwise.array().matrix()
                             + (1.0 - state.beta2) * grad_u.cwiseProduct(grad_u);
        const Eigen::ArrayXXd m1_hat = state.m1.array() / bc1;
        const Eigen::ArrayXXd m2_hat = state.m2_elementwise.array() / bc2;
        state.u.array() -= state.step_size * m1_hat / (m2_hat.sqrt() + state.epsilon);
        return;
    }

    // Shared second moment: square of the largest gradient entry. Every
    // coordinate is divided by the same scalar, so the step keeps the
    // direction of the (bias-corrected) first moment.
    const double gmax = grad_u.cwiseAbs().maxCoeff();
    state.m2_scalar = state.beta2 * state.m2_scalar + (1.0 - state.beta2) * gmax * gmax;
    const double denom = std::sqrt(state.m2_scalar / bc2) + state.epsilon;
    state.u -= (state.step_size / (bc1 * denom)) * state.m1;
}

void save_metrics_csv(const std::vector<IterationMetrics>& trace, const std::string& path)
{
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        throw IoError("cannot open metrics file for writing: " + path);
    }
    std::fputs("iter,E_d,D_c,D_n,E_a_u,E_a_k,E_lmk,w_u,w_k,edge_len_mean,edge_len_cv,wall_ms\n", f);
    for (const auto& r : trace) {
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                     r.iter, r.e_data, r.chamfer, r.normal, r.e_adapt_uniform,
                     r.e_adapt_curvature, r.e_landmark, r.w_u, r.w_k,
                     r.edge_len_mean, r.edge_len_cv, r.wall_ms);
    }
    std::fclose(f);
}

namespace {

// Mean and coefficient of variation of per-vertex mean edge lengths.
std::pair<double, double> edge_length_stats(const ScalarField& lengths)
{
    const double mean = lengths.mean();
    if (lengths.size() < 2 || mean <= 0.0) {
        return {mean, 0.0};
    }
    const double var = (lengths.array() - mean).square().sum() / double(lengths.size());
    return {mean, std::sqrt(var) / mean};
}

}  // namespace

FitResult fit(const TriMesh& template_mesh, const TriMesh& target, const FitConfig& cfg,
              const std::optional<LandmarkConstraint>& landmarks)
{
    if (cfg.iterations <= 0) {
        throw ConfigError("iteration count must be positive");
    }
    if (cfg.threads < 1) {
        throw ConfigError("thread count must be at least 1");
    }
    if (cfg.m < 0.0) {
        throw ConfigError("adaptation strength must be non-negative");
    }
    if (cfg.step_size <= 0.0) {
        throw ConfigError("step size must be positive");
    }
    const int n = template_mesh.vertex_count();
    const SparseLaplacian L = build_laplacian(template_mesh);

    // Baselines regularize in plain coordinates, so the re-parameterization
    // is switched off (lambda = 0 makes u = p).
    const bool baseline = cfg.baseline != BaselineMode::None;
    const double lambda = baseline ? 0.0 : cfg.lambda;
    DiffusionSystem diffusion(L, lambda);
    DiffusionSystem curvature_smoother(L, cfg.lambda_s);

    SurfaceIndex index(target);
    const ScheduleConfig sched = cfg.schedule();

    OptimizerState state = make_optimizer_state(diffusion.apply(template_mesh.positions), cfg.step_size);
    state.beta1 = cfg.beta1;
    state.beta2 = cfg.beta2;
    state.epsilon = cfg.epsilon;
    state.per_coordinate = cfg.per_coordinate_adam;

    TriMesh current = template_mesh;
    std::vector<IterationMetrics> trace;
    trace.reserve(cfg.iterations);

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    for (int t = 0; t < cfg.iterations; ++t) {
        current.positions = diffusion.solve(state.u);

        // Correspondences are frozen within the iteration: matched first,
        // then treated as constants by the data terms.
        const Correspondence corr = closest_points(index, current.positions, cfg.threads);

        // Baselines replace the adaptation terms entirely, so their weights
        // are forced to zero rather than following the schedule.
        auto [w_u, w_k] = schedule_weights(t, sched);
        if (baseline) {
            w_u = 0.0;
            w_k = 0.0;
        }

        IterationMetrics row;
        row.iter = t;
        row.w_u = w_u;
        row.w_k = w_k;

        Eigen::MatrixX3d grad_p = Eigen::MatrixX3d::Zero(n, 3);

        row.chamfer = chamfer_loss(current.positions, corr);
        grad_p += chamfer_loss_gradient(current.positions, corr);
        row.normal = normal_loss(current, corr);
        grad_p += normal_loss_gradient(current, corr);
        row.e_data = row.chamfer + row.normal;

        const ScalarField lengths = mean_edge_lengths(current);
        std::tie(row.edge_len_mean, row.edge_len_cv) = edge_length_stats(lengths);

        if (w_u > 0.0) {
            const EdgeLengthTarget tgt = uniform_target(current);
            row.e_adapt_uniform = adaptation_energy(current, tgt);
            grad_p += w_u * adaptation_gradient(current, tgt);
        }
        if (w_k > 0.0) {
            const EdgeLengthTarget tgt = adaptive_target(current, L, curvature_smoother);
            row.e_adapt_curvature = adaptation_energy(current, tgt);
            grad_p += w_k * adaptation_gradient(current, tgt);
        }

        if (landmarks) {
            row.e_landmark = landmark_loss(current.positions, landmarks->template_indices,
                                           landmarks->target_points);
            grad_p += landmark_loss_gradient(current.positions, landmarks->template_indices,
                                        landmarks->target_points);
        }

        if (cfg.baseline == BaselineMode::Laplacian) {
            grad_p += cfg.baseline_weight * laplacian_energy_gradient(L, current.positions);
        } else if (cfg.baseline == BaselineMode::Bilaplacian) {
            grad_p += cfg.baseline_weight * bilaplacian_energy_gradient(L, current.positions);
        }

        const Eigen::MatrixX3d grad_u = diffusion.solve_transpose(grad_p);

        try {
            uniform_step(state, grad_u);
        } catch (const SolverError&) {
            std::ostringstream msg;
            msg << "non-finite gradient at iteration " << t
                << " (E_d=" << row.e_data << ", E_a_u=" << row.e_adapt_uniform
                << ", E_a_k=" << row.e_adapt_curvature << ", E_lmk=" << row.e_landmark << ")";
            throw SolverError(msg.str());
        }

        row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        trace.push_back(row);
    }

    current.positions = diffusion.solve(state.u);
    if (!current.positions.allFinite()) {
        throw SolverError("fit produced non-finite vertex positions");
    }
    return {std::move(current), std::move(trace)};
}

FitResult optimize_adaptation_only(const TriMesh& mesh, const ScalarField& target_lengths,
                                   const FitConfig& cfg)
{
    if (cfg.iterations <= 0) {
        throw ConfigError("iteration count must be positive");
    }
    if (target_lengths.size() != mesh.vertex_count()) {
        throw ConfigError("target length field size does not match vertex count");
    }
    const int n = mesh.vertex_count();
    const SparseLaplacian L = build_laplacian(mesh);
    DiffusionSystem diffusion(L, cfg.lambda);

    EdgeLengthTarget tgt;
    tgt.lengths = target_lengths;
    tgt.kind = EdgeLengthTarget::Kind::Uniform;

    OptimizerState state = make_optimizer_state(diffusion.apply(mesh.positions), cfg.step_size);
    state.beta1 = cfg.beta1;
    state.beta2 = cfg.beta2;
    state.epsilon = cfg.epsilon;
    state.per_coordinate = cfg.per_coordinate_adam;

    TriMesh current = mesh;
    std::vector<IterationMetrics> trace;
    trace.reserve(cfg.iterations);

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    for (int t = 0; t < cfg.iterations; ++t) {
        current.positions = diffusion.solve(state.u);
        const ScalarField lengths = mean_edge_lengths(current);

        IterationMetrics row;
        row.iter = t;
        row.e_adapt_uniform = adaptation_energy(current, tgt);
        std::tie(row.edge_len_mean, row.edge_len_cv) = edge_length_stats(lengths);

        const Eigen::MatrixX3d grad_p = adaptation_gradient(current, tgt);
        const Eigen::MatrixX3d grad_u = diffusion.solve_transpose(grad_p);
        uniform_step(state, grad_u);

        row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        trace.push_back(row);
    }

    current.positions = diffusion.solve(state.u);
    if (!current.positions.allFinite()) {
        throw SolverError("adaptation produced non-finite vertex positions");
    }
    return {std::move(current), std::move(trace)};
}

}  // namespace densadapt
