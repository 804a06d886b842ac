#pragma once

#include <string>
#include <vector>

#include "densadapt/landmarks.hpp"
#include "densadapt/optimizer.hpp"

namespace densadapt {

/// One corpus line: target mesh, its annotated landmarks, and where the
/// registered mesh goes.
struct RegisterEntry {
    std::string target_path;
    std::string landmark_path;
    std::string output_path;
};

/// Manifest format: three whitespace-separated paths per line, `#` comments.
std::vector<RegisterEntry> parse_manifest(const std::string& path);

struct RegisterOptions {
    FitConfig fit;
    int anchor_index = 16;
    double anchor_weight = 1e4;
    bool skip_landmarks = false;            // stop after stage 1
    std::string resampled_landmarks_path;   // written in stage 2 when non-empty
    bool write_outputs = true;              // tests can run in memory only
};

struct RegisterOutcome {
    LandmarkSet resampled;                  // empty when skip_landmarks
    std::vector<FitResult> stage1;
    std::vector<FitResult> stage3;          // empty when skip_landmarks
};

/// Three-stage corpus registration. Stage 1 fits the template to every
/// target without landmarks (outputs suffixed .stage1 unless that is the
/// final stage). Stage 2 resamples the corpus landmarks onto the template.
/// Stage 3 re-fits every target with the landmark tether at the resampled
/// vertices and writes the final meshes. Failures abort naming the target.
RegisterOutcome run_register_pipeline(const TriMesh& template_mesh,
                                      const std::vector<RegisterEntry>& entries,
                                      const RegisterOptions& opts);

}  // namespace densadapt
