// Command line front end for the scan planning and inspection pipeline.
// Exit codes: 0 success, 2 configuration error, 3 stage failure.

#include "linescan/pipeline.hpp"
#include "linescan/rng.hpp"
#include "linescan/scan_control.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace linescan;

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> mesh;
    std::optional<double> gamma_deg;
    std::optional<double> beta_deg;
    std::optional<int> area_threshold;
};

PipelineConfig resolveConfig(const CliOverrides& o) {
    PipelineConfig cfg = o.config_path.empty() ? defaultConfig() : loadConfigFile(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.mesh) cfg.mesh = *o.mesh;
    if (o.gamma_deg) cfg.segmentation.gamma = degToRad(*o.gamma_deg);
    if (o.beta_deg) cfg.camera.beta = degToRad(*o.beta_deg);
    if (o.area_threshold) cfg.detect.area_threshold = *o.area_threshold;
    return cfg;
}

void addCommonFlags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "pipeline config JSON");
    cmd->add_option("--seed", o.seed, "root seed (overrides config)");
    cmd->add_option("--out-dir", o.out_dir, "artifact directory (overrides config)");
    cmd->add_option("--mesh", o.mesh, "mesh file or builtin:<name> (overrides config)");
    cmd->add_option("--gamma-deg", o.gamma_deg, "segmentation angle threshold, degrees");
    cmd->add_option("--beta-deg", o.beta_deg, "patch normal threshold, degrees");
    cmd->add_option("--area-threshold", o.area_threshold, "defect area threshold, px");
}

// Artifacts a failed stage leaves behind get a .failed suffix.
void markFailed(const PipelineConfig& cfg, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        fs::path p = fs::path(cfg.out_dir) / name;
        std::error_code ec;
        if (fs::exists(p, ec)) fs::rename(p, fs::path(p.string() + ".failed"), ec);
    }
}

int runStage(const PipelineConfig& cfg, const std::string& stage,
             const std::vector<std::string>& artifacts) {
    try {
        if (stage == "sample") {
            SampleOutputs out = runSample(cfg);
            std::printf("sampled %zu points, %zu exterior\n", out.sampled.size(),
                        out.exterior.size());
        } else if (stage == "segment") {
            SegmentationResult seg = runSegment(cfg);
            std::printf("segmented into %zu regions (K=%d, converged=%s)\n",
                        seg.regions.size(), seg.final_k, seg.converged ? "yes" : "no");
        } else if (stage == "plan") {
            PlanOutputs out = runPlan(cfg);
            std::printf("planned %zu patches over %zu regions\n", out.path.points.size() / 2,
                        out.path.regions.size());
        } else if (stage == "register") {
            RegistrationResult reg = runRegister(cfg);
            std::printf("registered: rms=%.6f mm, iterations=%d, c2c mean=%.6f std=%.6f\n",
                        reg.rms_error, reg.iterations, reg.c2c_mean, reg.c2c_std);
        } else if (stage == "scan-sim") {
            ScanSimOutputs out = runScanSim(cfg);
            std::printf("simulated %zu images, %zu defects injected, coverage %.4f\n",
                        out.sim.images.size(), out.defects.defects.size(), out.sim.coverage);
        } else if (stage == "detect") {
            DetectOutputs out = runDetect(cfg);
            std::size_t total = 0;
            for (const auto& v : out.per_image) total += v.size();
            std::printf("detected %zu defects over %zu images\n", total, out.per_image.size());
            if (out.scored)
                std::printf("precision %.3f recall %.3f f-measure %.3f\n",
                            out.overall.precision, out.overall.recall, out.overall.f_measure);
        } else if (stage == "map") {
            MapOutputs out = runMap(cfg);
            std::printf("mapped %zu detections to 3-d", out.locations.size());
            if (out.matched > 0)
                std::printf(", max object-frame error %.4f mm over %d matches",
                            out.max_object_error, out.matched);
            std::printf("\n");
        } else if (stage == "e2e") {
            E2eSummary s = runE2e(cfg);
            std::printf("stage            | result\n");
            std::printf("-----------------+---------------------------\n");
            std::printf("exterior points  | %d\n", s.exterior_points);
            std::printf("regions          | %d (converged=%s)\n", s.region_count,
                        s.segmentation_converged ? "yes" : "no");
            std::printf("patches          | %d\n", s.patch_count);
            std::printf("coverage         | %.4f\n", s.coverage);
            std::printf("registration     | rot %.4f deg, trans %.4f mm\n",
                        s.registration_rot_err_deg, s.registration_trans_err);
            std::printf("boundary c2c     | mean %.6f mm, std %.6f mm\n", s.c2c_mean,
                        s.c2c_std);
            std::printf("defects injected | %d\n", s.defect_count);
            std::printf("detection        | TP %d FP %d FN %d  p=%.3f r=%.3f f=%.3f\n",
                        s.detection.tp, s.detection.fp, s.detection.fn,
                        s.detection.precision, s.detection.recall, s.detection.f_measure);
            std::printf("map error        | %.4f mm (max)\n", s.max_map_error);
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stage %s failed: %s\n", stage.c_str(), e.what());
        markFailed(cfg, artifacts);
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linescan: scan planning and defect inspection for specular surfaces"};
    app.require_subcommand(1);

    struct StageDef {
        const char* name;
        const char* help;
        std::vector<std::string> artifacts;
    };
    const std::vector<StageDef> stages = {
        {"sample", "sample the mesh and filter exterior points",
         {"sampled.ply", "exterior.ply"}},
        {"segment", "cluster normals into near-flat regions",
         {"regions.json", "regions_colored.ply"}},
        {"plan", "plan the adaptive scan path", {"scanpath.json"}},
        {"register", "simulate a depth capture and localize the object",
         {"capture.ply", "registration.json"}},
        {"scan-sim", "simulate the line scan along the planned path",
         {"defects.json", "robotpath.json", "truth.json", "coverage.json"}},
        {"detect", "detect defects in captured images",
         {"detections.json", "metrics.csv"}},
        {"map", "map detections back to 3-d", {"defect_map.json", "defect_map.ply"}},
        {"e2e", "run the whole pipeline", {"manifest.json"}},
    };

    CliOverrides overrides;
    std::string chosen;
    for (const auto& st : stages) {
        CLI::App* cmd = app.add_subcommand(st.name, st.help);
        addCommonFlags(cmd, overrides);
        cmd->callback([&chosen, name = std::string(st.name)]() { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    PipelineConfig cfg;
    try {
        cfg = resolveConfig(overrides);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    for (const auto& st : stages)
        if (chosen == st.name) return runStage(cfg, chosen, st.artifacts);
    return 2;
}
