#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "densadapt/mesh.hpp"

namespace densadapt {

/// A differentiable scalar energy of vertex positions plus its analytic
/// gradient, bundled for finite-difference verification. Probes capture any
/// frozen quantities (targets, correspondences, operators) so both callables
/// see the same constants the optimizer would.
struct EnergyProbe {
    std::string name;
    Eigen::MatrixX3d x0;
    std::function<double(const Eigen::MatrixX3d&)> energy;
    std::function<Eigen::MatrixX3d(const Eigen::MatrixX3d&)> gradient;
};

struct GradCheckReport {
    std::string name;
    double max_rel_error = 0.0;
    int worst_vertex = -1;
    int worst_axis = -1;

    bool passed(double tol) const { return max_rel_error < tol; }
};

/// Central differences with step h on every coordinate of probe.x0. The
/// relative error is the largest entrywise deviation normalized by the
/// largest analytic gradient entry.
GradCheckReport check_gradient(const EnergyProbe& probe, double h);

/// The full verification set on a seeded irregular sphere against a bumpy
/// target: adaptation energy, Laplacian and squared-Laplacian energies,
/// closest-point distance, normal agreement, landmark tether, and each of
/// them composed through the diffusion re-parameterization.
std::vector<EnergyProbe> standard_probes(std::uint64_t seed, int subdivisions = 2);

/// Runs every standard probe at step h and returns the reports.
std::vector<GradCheckReport> run_gradcheck(std::uint64_t seed, double h = 1e-5,
                                           int subdivisions = 2);

}  // namespace densadapt
