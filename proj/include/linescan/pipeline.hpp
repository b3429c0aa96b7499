#pragma once

#include "linescan/cloud_ops.hpp"
#include "linescan/geometry.hpp"
#include "linescan/inspection.hpp"
#include "linescan/path_planner.hpp"
#include "linescan/registration.hpp"
#include "linescan/scan_control.hpp"
#include "linescan/segmentation.hpp"
#include "linescan/sim_harness.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace linescan {

/// Scene settings for the simulated capture. Poses are in-plane: the object
/// rests on the manipulation plane, so the free parameters are a rotation
/// about the plane normal and a translation inside the plane.
struct SceneConfig {
    Plane plane = Plane::fromCoefficients(0, 0, 1, 25.0);  // z = -25 mm
    double yaw_deg = 0.0;
    double tx = 0.0, ty = 0.0;  // along the plane's in-plane axes
    double grid_spacing = 1.0;
    double grid_margin = 30.0;
    double depth_noise_sigma = 0.0;

    RigidTransform truePose() const;
};

/// Defect injection settings. Explicit points win over auto placement.
struct DefectConfig {
    int count = 6;
    double radius = 1.5;
    double contrast = 200.0;
    std::vector<Defect> explicit_defects;
};

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::string mesh = "builtin:mirror";
    std::string out_dir = "out";
    int sample_points = 12000;
    RayFanConfig ray_fan;
    int normals_k = 20;
    BoundaryConfig boundary;
    SegmentationConfig segmentation;
    CameraSpec camera;
    IcpConfig icp;
    DetectConfig detect;
    SceneConfig scene;
    DefectConfig defects;
};

PipelineConfig defaultConfig();
PipelineConfig loadConfigFile(const std::string& path);
PipelineConfig configFromJsonText(const std::string& text);
std::string configToJsonText(const PipelineConfig& cfg);
std::uint64_t configHash(const PipelineConfig& cfg);

/// Stage runners. Each writes its artifacts under cfg.out_dir and reads the
/// artifacts of the stages before it from the same directory.
struct SampleOutputs {
    PointCloud sampled;
    PointCloud exterior;  // with normals
};
SampleOutputs runSample(const PipelineConfig& cfg);

SegmentationResult runSegment(const PipelineConfig& cfg);

struct PlanOutputs {
    ScanPath path;
    std::vector<RegionPlan> plans;
};
PlanOutputs runPlan(const PipelineConfig& cfg);

RegistrationResult runRegister(const PipelineConfig& cfg);

struct ScanSimOutputs {
    ScanSimResult sim;
    DefectSpec defects;
    std::vector<std::pair<RobotPose, RobotPose>> robot_path;
};
ScanSimOutputs runScanSim(const PipelineConfig& cfg);

struct DetectOutputs {
    std::vector<std::vector<DefectBox>> per_image;
    DetectionMetrics overall;  // zeros when no ground truth is present
    bool scored = false;
};
DetectOutputs runDetect(const PipelineConfig& cfg);

struct MapOutputs {
    std::vector<DefectLocation> locations;
    double max_object_error = 0.0;  // vs injected truth, when available
    int matched = 0;
};
MapOutputs runMap(const PipelineConfig& cfg);

struct E2eSummary {
    int exterior_points = 0;
    int region_count = 0;
    bool segmentation_converged = false;
    int patch_count = 0;
    double coverage = 0.0;
    double registration_rot_err_deg = 0.0;
    double registration_trans_err = 0.0;
    double c2c_mean = 0.0;
    double c2c_std = 0.0;
    DetectionMetrics detection;
    int defect_count = 0;
    double max_map_error = 0.0;
};

/// Runs every stage in order and writes a reproducibility manifest.
E2eSummary runE2e(const PipelineConfig& cfg);

/// Regions JSON (schema "linescan.regions/1").
void saveSegmentation(const std::string& path, const SegmentationResult& seg);
SegmentationResult loadSegmentation(const std::string& path);

/// Angular and translational deviation between two rigid transforms.
double rotationErrorDeg(const RigidTransform& a, const RigidTransform& b);
double translationError(const RigidTransform& a, const RigidTransform& b);

}  // namespace linescan
