#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densadapt/mesh.hpp"

namespace densadapt {

/// Two-phase adaptation weight schedule over T iterations:
/// uniform density (w_u = m) for the first quarter, adaptive density
/// (w_k = 2m) for the second quarter, both off for the remaining half.
struct ScheduleConfig {
    double m = 1.5;
    int total_iterations = 1400;
};

/// (w_u, w_k) at iteration t. Intervals are half-open, evaluated with exact
/// integer arithmetic: [0, T/4), [T/4, T/2), [T/2, T).
std::pair<double, double> schedule_weights(int t, const ScheduleConfig& cfg);

/// Adam-style state whose second moment is a single scalar shared by every
/// coordinate, so one step scales all coordinates by the same denominator
/// and preserves the gradient's direction ratios.
struct OptimizerState {
    Eigen::MatrixX3d u;                       // optimized coordinates
    Eigen::MatrixX3d m1;                      // first moment
    double m2_scalar = 0.0;                   // shared second moment
    int t = 0;                                // completed steps
    double step_size = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool per_coordinate = false;              // sensitivity switch: plain Adam
    Eigen::MatrixX3d m2_elementwise;          // used only when per_coordinate
};

OptimizerState make_optimizer_state(const Eigen::MatrixX3d& u0, double step_size);

/// One update. The shared second moment tracks the squared largest gradient
/// entry; bias corrections are applied every step. Throws SolverError on a
/// non-finite gradient.
void uniform_step(OptimizerState& state, const Eigen::MatrixX3d& grad_u);

enum class BaselineMode { None, Laplacian, Bilaplacian };

struct FitConfig {
    double lambda = 19.0;        // diffusion time of the re-parameterization
    double step_size = 1e-2;
    int iterations = 1400;
    double m = 1.5;              // adaptation strength (0 disables adaptation)
    double lambda_s = 1.0;       // curvature-field smoothing time
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool per_coordinate_adam = false;
    BaselineMode baseline = BaselineMode::None;
    double baseline_weight = 0.0;
    int threads = 1;

    ScheduleConfig schedule() const { return {m, iterations}; }
};

/// Optional landmark tether for the registration objective.
struct LandmarkConstraint {
    std::vector<int> template_indices;
    Eigen::MatrixX3d target_points;
};

/// One row of the per-iteration metrics trace.
struct IterationMetrics {
    int iter = 0;
    double e_data = 0.0;
    double chamfer = 0.0;
    double normal = 0.0;
    double e_adapt_uniform = 0.0;
    double e_adapt_curvature = 0.0;
    double e_landmark = 0.0;
    double w_u = 0.0;
    double w_k = 0.0;
    double edge_len_mean = 0.0;
    double edge_len_cv = 0.0;
    double wall_ms = 0.0;
};

/// Writes the trace as CSV with the stable column set
/// iter,E_d,D_c,D_n,E_a_u,E_a_k,E_lmk,w_u,w_k,edge_len_mean,edge_len_cv,wall_ms.
void save_metrics_csv(const std::vector<IterationMetrics>& trace, const std::string& path);

struct FitResult {
    TriMesh mesh;
    std::vector<IterationMetrics> trace;
};

/// Deforms the template onto the target by minimizing the fitting objective
/// in diffusion re-parameterized coordinates: per iteration the loop maps u
/// to positions, refreshes closest-point correspondences, rebuilds both
/// density targets from the current shape, assembles the weighted gradient,
/// pulls it back to u-space and takes one uniform step. Connectivity is
/// never touched; the result reuses the template's face array.
FitResult fit(const TriMesh& template_mesh, const TriMesh& target, const FitConfig& cfg,
              const std::optional<LandmarkConstraint>& landmarks = std::nullopt);

/// Pure density redistribution: minimizes the adaptation energy alone (fixed
/// target lengths) through the re-parameterization.
FitResult optimize_adaptation_only(const TriMesh& mesh, const ScalarField& target_lengths,
                                   const FitConfig& cfg);

}  // namespace densadapt
