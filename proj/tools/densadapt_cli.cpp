#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "densadapt/errors.hpp"
#include "densadapt/eval.hpp"
#include "densadapt/gradcheck.hpp"
#include "densadapt/landmarks.hpp"
#include "densadapt/mesh.hpp"
#include "densadapt/optimizer.hpp"
#include "densadapt/parallel.hpp"
#include "densadapt/pipeline.hpp"
#include "densadapt/synthetic.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace densadapt;

// Shared optimization flags, attached to both fit and register.
struct FitArgs {
    double lambda = 19.0;
    double step_size = 1e-2;
    int iters = 1400;
    double m = 1.5;
    double lambda_s = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::string adam = "uniform";
    std::string baseline = "none";
    double baseline_weight = 1.0;
    int threads = 0;
};

void add_fit_flags(CLI::App* cmd, FitArgs& a)
{
    cmd->add_option("--lambda", a.lambda, "diffusion re-parameterization time");
    cmd->add_option("--step-size", a.step_size, "optimizer step size");
    cmd->add_option("--iters", a.iters, "iteration budget T");
    cmd->add_option("--m", a.m, "adaptation strength (0 disables density control)");
    cmd->add_option("--lambda-s", a.lambda_s, "curvature field smoothing time");
    cmd->add_option("--beta1", a.beta1, "first moment decay");
    cmd->add_option("--beta2", a.beta2, "second moment decay");
    cmd->add_option("--epsilon", a.epsilon, "optimizer denominator floor");
    cmd->add_option("--adam", a.adam, "second moment mode: uniform | per_coordinate")
        ->check(CLI::IsMember({"uniform", "per_coordinate"}));
    cmd->add_option("--baseline", a.baseline,
                    "regularizer baseline: none | laplacian | bilaplacian (disables the re-parameterization)")
        ->check(CLI::IsMember({"none", "laplacian", "bilaplacian"}));
    cmd->add_option("--baseline-weight", a.baseline_weight, "baseline regularizer weight");
    cmd->add_option("--threads", a.threads, "worker threads (0 = hardware)");
}

FitConfig to_config(const FitArgs& a)
{
    FitConfig cfg;
    cfg.lambda = a.lambda;
    cfg.step_size = a.step_size;
    cfg.iterations = a.iters;
    cfg.m = a.m;
    cfg.lambda_s = a.lambda_s;
    cfg.beta1 = a.beta1;
    cfg.beta2 = a.beta2;
    cfg.epsilon = a.epsilon;
    cfg.per_coordinate_adam = a.adam == "per_coordinate";
    if (a.baseline == "laplacian") {
        cfg.baseline = BaselineMode::Laplacian;
        cfg.baseline_weight = a.baseline_weight;
    } else if (a.baseline == "bilaplacian") {
        cfg.baseline = BaselineMode::Bilaplacian;
        cfg.baseline_weight = a.baseline_weight;
    }
    cfg.threads = resolve_threads(a.threads);
    return cfg;
}

json fit_json(const FitArgs& a, const FitConfig& cfg)
{
    return {{"lambda", a.lambda},
            {"step_size", a.step_size},
            {"iters", a.iters},
            {"m", a.m},
            {"lambda_s", a.lambda_s},
            {"beta1", a.beta1},
            {"beta2", a.beta2},
            {"epsilon", a.epsilon},
            {"adam", a.adam},
            {"baseline", a.baseline},
            {"baseline_weight", a.baseline_weight},
            {"threads", cfg.threads}};
}

void echo_config(const json& j, const std::string& file_path = "")
{
    std::cout << j.dump(2) << "\n";
    if (!file_path.empty()) {
        std::ofstream out(file_path);
        if (!out) {
            throw IoError("cannot write config echo: " + file_path);
        }
        out << j.dump(2) << "\n";
    }
}

ScalarField load_weight_file(const std::string& path, int expected)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open weight file: " + path);
    }
    std::vector<double> values;
    double v;
    while (in >> v) {
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != expected) {
        throw ConfigError("weight file has " + std::to_string(values.size()) +
                          " entries, mesh has " + std::to_string(expected) + " vertices");
    }
    return Eigen::Map<ScalarField>(values.data(), values.size());
}

int run(int argc, char** argv)
{
    CLI::App app{"template mesh registration with density adaptation"};
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "deform a template onto one target");
    std::string fit_template, fit_target, fit_output = "fitted.obj", fit_metrics = "metrics.csv";
    std::string fit_tpl_lmk, fit_tgt_lmk;
    FitArgs fit_args;
    fit_cmd->add_option("--template", fit_template, "template mesh (OBJ)")->required();
    fit_cmd->add_option("--target", fit_target, "target mesh (OBJ)")->required();
    fit_cmd->add_option("--output", fit_output, "fitted mesh path");
    fit_cmd->add_option("--metrics", fit_metrics, "per-iteration metrics CSV path");
    fit_cmd->add_option("--template-landmarks", fit_tpl_lmk,
                        "landmark vertex indices on the template ('i' lines)");
    fit_cmd->add_option("--target-landmarks", fit_tgt_lmk, "landmark positions on the target");
    add_fit_flags(fit_cmd, fit_args);

    // register
    auto* reg_cmd = app.add_subcommand("register", "three-stage corpus registration");
    std::string reg_template, reg_manifest, reg_resampled = "resampled_landmarks.txt";
    int reg_anchor_index = 16;
    double reg_anchor_weight = 1e4;
    bool reg_skip = false;
    FitArgs reg_args;
    reg_cmd->add_option("--template", reg_template, "template mesh (OBJ)")->required();
    reg_cmd->add_option("--manifest", reg_manifest,
                        "corpus manifest: '<target> <landmarks> <output>' per line")
        ->required();
    reg_cmd->add_option("--resampled-out", reg_resampled, "resampled landmark file path");
    reg_cmd->add_option("--anchor-index", reg_anchor_index, "emphasized landmark index");
    reg_cmd->add_option("--anchor-weight", reg_anchor_weight, "emphasized landmark weight");
    reg_cmd->add_flag("--skip-landmarks", reg_skip, "stop after stage 1");
    add_fit_flags(reg_cmd, reg_args);

    // resample-landmarks
    auto* res_cmd = app.add_subcommand("resample-landmarks",
                                       "transfer corpus landmarks onto the template from existing fittings");
    std::string res_template, res_manifest, res_output = "resampled_landmarks.txt";
    int res_anchor_index = 16;
    double res_anchor_weight = 1e4;
    res_cmd->add_option("--template", res_template, "template mesh (OBJ)")->required();
    res_cmd->add_option("--manifest", res_manifest,
                        "manifest: '<target> <landmarks> <fitted>' per line, fitted meshes must exist")
        ->required();
    res_cmd->add_option("--output", res_output, "resampled landmark file path");
    res_cmd->add_option("--anchor-index", res_anchor_index, "emphasized landmark index");
    res_cmd->add_option("--anchor-weight", res_anchor_weight, "emphasized landmark weight");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "sampled surface comparison metrics");
    std::string eval_fitted, eval_reference, eval_json_path, eval_weights;
    int eval_samples = 100000;
    std::uint64_t eval_seed = 0;
    int eval_threads = 0;
    eval_cmd->add_option("--fitted", eval_fitted, "fitted mesh (OBJ)")->required();
    eval_cmd->add_option("--reference", eval_reference, "reference mesh (OBJ)")->required();
    eval_cmd->add_option("--samples", eval_samples, "sample count per direction");
    eval_cmd->add_option("--seed", eval_seed, "sampling seed");
    eval_cmd->add_option("--json", eval_json_path, "write metrics JSON here");
    eval_cmd->add_option("--weights", eval_weights,
                         "per-vertex weights on the reference mesh (one value per line)");
    eval_cmd->add_option("--threads", eval_threads, "worker threads (0 = hardware)");

    // gradcheck
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::uint64_t grad_seed = 7;
    double grad_h = 1e-5, grad_tol = 1e-4;
    int grad_subdiv = 2;
    grad_cmd->add_option("--seed", grad_seed, "probe mesh seed");
    grad_cmd->add_option("--step", grad_h, "central difference step");
    grad_cmd->add_option("--threshold", grad_tol, "max acceptable relative error");
    grad_cmd->add_option("--subdivisions", grad_subdiv, "probe sphere subdivision level");

    // make-synthetic
    auto* make_cmd = app.add_subcommand("make-synthetic", "generate a deterministic test shape");
    std::string make_kind = "sphere", make_output = "synthetic.obj", make_lmk_out;
    std::uint64_t make_seed = 0;
    SyntheticParams make_params;
    make_cmd->add_option("--kind", make_kind, "sphere | spiky_star | bumpy_sphere | face_blob")
        ->required();
    make_cmd->add_option("--seed", make_seed, "shape seed");
    make_cmd->add_option("--subdivisions", make_params.subdivisions, "icosphere subdivision level");
    make_cmd->add_option("--radius", make_params.radius, "base radius");
    make_cmd->add_option("--height", make_params.bump_height, "spiky_star bump height");
    make_cmd->add_option("--sigma", make_params.bump_sigma, "spiky_star bump width (radians)");
    make_cmd->add_option("--output", make_output, "mesh path");
    make_cmd->add_option("--landmarks-out", make_lmk_out, "landmark file path (face_blob)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help exits clean, usage errors exit 2
    }

    if (fit_cmd->parsed()) {
        const FitConfig cfg = to_config(fit_args);
        json j = fit_json(fit_args, cfg);
        j["command"] = "fit";
        j["template"] = fit_template;
        j["target"] = fit_target;
        j["output"] = fit_output;
        j["metrics"] = fit_metrics;
        j["template_landmarks"] = fit_tpl_lmk;
        j["target_landmarks"] = fit_tgt_lmk;
        echo_config(j, fit_output + ".config.json");

        const TriMesh template_mesh = load_obj(fit_template);
        const TriMesh target = load_obj(fit_target);

        std::optional<LandmarkConstraint> tether;
        if (!fit_tpl_lmk.empty() != !fit_tgt_lmk.empty()) {
            throw ConfigError("landmark fitting needs both --template-landmarks and --target-landmarks");
        }
        if (!fit_tpl_lmk.empty()) {
            const LandmarkSet on_template = load_landmarks(fit_tpl_lmk, &template_mesh);
            const LandmarkSet on_target = load_landmarks(fit_tgt_lmk, &target);
            if (on_template.indices.empty()) {
                throw ConfigError("template landmarks must be vertex indices ('i' lines)");
            }
            if (on_template.size() != on_target.size()) {
                throw ConfigError("landmark counts differ between template and target files");
            }
            tether = LandmarkConstraint{on_template.indices, on_target.points};
        }

        const FitResult result = fit(template_mesh, target, cfg, tether);
        save_obj(result.mesh, fit_output);
        save_metrics_csv(result.trace, fit_metrics);
        std::cout << "wrote " << fit_output << " and " << fit_metrics << "\n";
        return 0;
    }

    if (reg_cmd->parsed()) {
        RegisterOptions opts;
        opts.fit = to_config(reg_args);
        opts.anchor_index = reg_anchor_index;
        opts.anchor_weight = reg_anchor_weight;
        opts.skip_landmarks = reg_skip;
        opts.resampled_landmarks_path = reg_resampled;

        json j = fit_json(reg_args, opts.fit);
        j["command"] = "register";
        j["template"] = reg_template;
        j["manifest"] = reg_manifest;
        j["resampled_out"] = reg_resampled;
        j["anchor_index"] = reg_anchor_index;
        j["anchor_weight"] = reg_anchor_weight;
        j["skip_landmarks"] = reg_skip;
        echo_config(j);

        const TriMesh template_mesh = load_obj(reg_template);
        const auto entries = parse_manifest(reg_manifest);
        run_register_pipeline(template_mesh, entries, opts);
        std::cout << "registered " << entries.size() << " target(s)\n";
        return 0;
    }

    if (res_cmd->parsed()) {
        json j{{"command", "resample-landmarks"},
               {"template", res_template},
               {"manifest", res_manifest},
               {"output", res_output},
               {"anchor_index", res_anchor_index},
               {"anchor_weight", res_anchor_weight}};
        echo_config(j);

        const TriMesh template_mesh = load_obj(res_template);
        const auto entries = parse_manifest(res_manifest);
        std::vector<FittedTarget> fittings;
        for (const auto& e : entries) {
            FittedTarget f;
            f.fitted = load_obj(e.output_path);
            const TriMesh target = load_obj(e.target_path);
            f.landmarks = load_landmarks(e.landmark_path, &target);
            fittings.push_back(std::move(f));
        }
        const Eigen::VectorXd w = anchor_weights(fittings.front().landmarks.size(),
                                                 res_anchor_index, res_anchor_weight);
        const LandmarkSet resampled = resample_landmarks(template_mesh, fittings, w);
        std::ostringstream anchor;
        anchor << "anchor index " << res_anchor_index << " weight " << res_anchor_weight;
        save_landmarks(res_output, resampled,
                       {"resampled template landmarks",
                        "reference fitting: " + entries.front().target_path, anchor.str()});
        std::cout << "wrote " << res_output << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        const int threads = resolve_threads(eval_threads);
        json j{{"command", "eval"},      {"fitted", eval_fitted}, {"reference", eval_reference},
               {"samples", eval_samples}, {"seed", eval_seed},     {"weights", eval_weights},
               {"threads", threads}};
        echo_config(j);

        const TriMesh fitted = load_obj(eval_fitted);
        const TriMesh reference = load_obj(eval_reference);
        std::optional<ScalarField> weights;
        if (!eval_weights.empty()) {
            weights = load_weight_file(eval_weights, reference.vertex_count());
        }
        const EvalMetrics m = eval_meshes(fitted, reference, eval_samples, eval_seed, threads,
                                          weights ? &*weights : nullptr);
        json out{{"chamfer", m.chamfer},
                 {"normal_mse", m.normal_mse},
                 {"forward_distance", m.forward_distance},
                 {"backward_distance", m.backward_distance}};
        std::cout << out.dump(2) << "\n";
        if (!eval_json_path.empty()) {
            std::ofstream f(eval_json_path);
            if (!f) {
                throw IoError("cannot write metrics JSON: " + eval_json_path);
            }
            f << out.dump(2) << "\n";
        }
        return 0;
    }

    if (grad_cmd->parsed()) {
        json j{{"command", "gradcheck"},
               {"seed", grad_seed},
               {"h", grad_h},
               {"threshold", grad_tol},
               {"subdivisions", grad_subdiv}};
        echo_config(j);

        bool ok = true;
        for (const auto& r : run_gradcheck(grad_seed, grad_h, grad_subdiv)) {
            const bool pass = r.passed(grad_tol);
            ok = ok && pass;
            std::printf("%-40s max rel err %.3e  %s\n", r.name.c_str(), r.max_rel_error,
                        pass ? "ok" : "FAIL");
            if (!pass) {
                std::printf("  worst at vertex %d axis %d\n", r.worst_vertex, r.worst_axis);
            }
        }
        return ok ? 0 : 1;
    }

    if (make_cmd->parsed()) {
        json j{{"command", "make-synthetic"},
               {"kind", make_kind},
               {"seed", make_seed},
               {"subdivisions", make_params.subdivisions},
               {"radius", make_params.radius},
               {"height", make_params.bump_height},
               {"sigma", make_params.bump_sigma},
               {"output", make_output},
               {"landmarks_out", make_lmk_out}};
        echo_config(j);

        const SyntheticShape shape =
            make_synthetic(parse_synthetic_kind(make_kind), make_seed, make_params);
        save_obj(shape.mesh, make_output);
        if (!make_lmk_out.empty()) {
            if (!shape.has_landmarks) {
                throw ConfigError("kind '" + make_kind + "' does not produce landmarks");
            }
            save_landmarks(make_lmk_out, shape.landmarks, {"synthetic landmarks"});
        }
        std::cout << "wrote " << make_output << "\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const SolverError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const MeshError& e) {
        std::fprintf(stderr, "mesh error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
