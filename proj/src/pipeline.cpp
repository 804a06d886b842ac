#include "densadapt/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "densadapt/errors.hpp"

namespace densadapt {

std::vector<RegisterEntry> parse_manifest(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus manifest: " + path);
    }
    std::vector<RegisterEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        RegisterEntry e;
        if (!(ls >> e.target_path)) {
            continue;  // blank line
        }
        if (e.target_path[0] == '#') {
            continue;
        }
        if (!(ls >> e.landmark_path >> e.output_path)) {
            std::ostringstream msg;
            msg << path << ":" << lineno
                << ": expected three paths (target, landmarks, output)";
            throw IoError(msg.str());
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) {
        throw ConfigError("corpus manifest lists no targets: " + path);
    }
    return entries;
}

namespace {

std::string stage1_path(const std::string& output_path)
{
    const auto dot = output_path.rfind('.');
    if (dot == std::string::npos || output_path.find('/', dot) != std::string::npos) {
        return output_path + ".stage1";
    }
    return output_path.substr(0, dot) + ".stage1" + output_path.substr(dot);
}

}  // namespace

RegisterOutcome run_register_pipeline(const TriMesh& template_mesh,
                                      const std::vector<RegisterEntry>& entries,
                                      const RegisterOptions& opts)
{
    if (entries.empty()) {
        throw ConfigError("register pipeline needs at least one target");
    }

    std::vector<TriMesh> targets;
    std::vector<LandmarkSet> landmarks;
    targets.reserve(entries.size());
    landmarks.reserve(entries.size());
    for (const auto& e : entries) {
        targets.push_back(load_obj(e.target_path));
        if (!opts.skip_landmarks) {
            landmarks.push_back(load_landmarks(e.landmark_path, &targets.back()));
        }
    }
    if (!opts.skip_landmarks) {
        const int b = landmarks.front().size();
        for (size_t i = 1; i < landmarks.size(); ++i) {
            if (landmarks[i].size() != b) {
                std::ostringstream msg;
                msg << "landmark count mismatch: " << entries[i].landmark_path << " has "
                    << landmarks[i].size() << ", expected " << b << " (from "
                    << entries.front().landmark_path << ")";
                throw ConfigError(msg.str());
            }
        }
    }

    RegisterOutcome outcome;

    for (size_t i = 0; i < entries.size(); ++i) {
        std::fprintf(stderr, "stage 1: fitting %s\n", entries[i].target_path.c_str());
        try {
            outcome.stage1.push_back(fit(template_mesh, targets[i], opts.fit));
        } catch (const SolverError& e) {
            throw SolverError("stage 1 failed on " + entries[i].target_path + ": " + e.what());
        }
        if (opts.write_outputs) {
            const std::string path = opts.skip_landmarks ? entries[i].output_path
                                                         : stage1_path(entries[i].output_path);
            save_obj(outcome.stage1.back().mesh, path);
        }
    }
    if (opts.skip_landmarks) {
        return outcome;
    }

    std::vector<FittedTarget> fittings;
    fittings.reserve(entries.size());
    for (size_t i = 0; i < entries.size(); ++i) {
        fittings.push_back({outcome.stage1[i].mesh, landmarks[i]});
    }
    const Eigen::VectorXd w =
        anchor_weights(landmarks.front().size(), opts.anchor_index, opts.anchor_weight);
    outcome.resampled = resample_landmarks(template_mesh, fittings, w);

    if (opts.write_outputs && !opts.resampled_landmarks_path.empty()) {
        std::ostringstream anchor;
        anchor << "anchor index " << opts.anchor_index << " weight " << opts.anchor_weight;
        save_landmarks(opts.resampled_landmarks_path, outcome.resampled,
                       {"resampled template landmarks", "reference fitting: " + entries.front().target_path,
                        anchor.str()});
    }

    for (size_t i = 0; i < entries.size(); ++i) {
        std::fprintf(stderr, "stage 3: fitting %s with landmarks\n", entries[i].target_path.c_str());
        LandmarkConstraint tether;
        tether.template_indices = outcome.resampled.indices;
        tether.target_points = landmarks[i].points;
        try {
            outcome.stage3.push_back(fit(template_mesh, targets[i], opts.fit, tether));
        } catch (const SolverError& e) {
            throw SolverError("stage 3 failed on " + entries[i].target_path + ": " + e.what());
        }
        if (opts.write_outputs) {
            save_obj(outcome.stage3.back().mesh, entries[i].output_path);
        }
    }
    return outcome;
}

}  // namespace densadapt
