#pragma once

#include "linescan/geometry.hpp"
#include "linescan/image.hpp"
#include "linescan/path_planner.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linescan {

/// Synthetic capture scene: a posed object over the manipulation plane seen
/// by an overhead depth camera.
struct SceneSpec {
    TriangleMesh object;
    RigidTransform true_pose;  // object frame -> robot frame
    Plane plane;               // manipulation plane in the robot frame
    double grid_spacing = 1.0;      // mm between capture samples
    double grid_margin = 30.0;      // mm of plane kept around the silhouette
    double depth_noise_sigma = 0.0; // mm along the plane normal
    std::uint64_t seed = 0;
};

/// A round surface mark in the object frame.
struct Defect {
    Vec3 point = Vec3::Zero();
    double radius = 2.0;     // mm
    double contrast = 200.0; // intensity lift over the background
};

struct DefectSpec {
    std::vector<Defect> defects;
    std::uint64_t seed = 0;
};

/// Regular plane grid with the object's silhouette removed (the specular
/// surface returns nothing to the depth camera) and optional Gaussian depth
/// noise. The grid lattice is anchored to the plane frame, so poses that
/// differ by a lattice multiple produce identically shifted holes.
/// Throws when the silhouette swallows the whole grid.
PointCloud synthDepthCapture(const SceneSpec& scene);

/// Silhouette membership test used by synthDepthCapture, exposed for checks:
/// true when the point projects into the posed mesh along the plane normal.
bool insideSilhouette(const TriangleMesh& mesh, const RigidTransform& pose,
                      const Plane& plane, const Vec3& plane_point);

struct PatchImageMeta {
    int region_id = -1;
    int patch_id = -1;
    int rows = 0;
    int cols = 0;
    PathPoint start;  // object-frame path pose the image is anchored to
    PathPoint stop;
};

struct ScanSimResult {
    std::vector<GrayImage> images;  // one per patch, rows stack along motion
    std::vector<PatchImageMeta> meta;
    double coverage = 0.0;  // fraction of exterior points inside some scan cube
    std::uint8_t background = 16;
};

/// Marches a virtual scan line along every patch pair of the path. A pixel
/// lights up when its ray passes within a defect's radius at a depth inside
/// the camera's depth of view. `pose_error` (recovered pose composed against
/// the true pose) displaces the camera relative to the object, mimicking an
/// imperfect registration; identity when absent.
ScanSimResult simulateLineScan(const DefectSpec& defects, const ScanPath& path,
                               const CameraSpec& cam, const PointCloud& exterior,
                               const RigidTransform* pose_error = nullptr);

/// Expected pixel footprint of one defect in one patch image, computed with
/// the same ray geometry the simulator uses. Returns the tight bounding box
/// and the lit pixel count; count 0 means the defect is invisible there.
struct DefectFootprint {
    PixelBox box;
    int pixels = 0;
    bool clipped = false;  // touches the image border
};
DefectFootprint defectFootprint(const Defect& defect, const PathPoint& start,
                                const PathPoint& stop, const CameraSpec& cam,
                                const RigidTransform* pose_error = nullptr);

/// Picks defect sites on planned patches: candidate exterior points are
/// accepted when their blob is fully inside exactly the patches that see it
/// and clear of every image border. Deterministic for a fixed seed.
DefectSpec placeDefects(const std::vector<RegionPlan>& plans, const CameraSpec& cam,
                        int count, double radius, double contrast, std::uint64_t seed);

/// Parametric convex test bodies, millimeter scale.
TriangleMesh makeMirrorMesh();                       // egg-shaped dome, ~120x80x36
TriangleMesh makeSphereMesh(double radius = 50.0, int stacks = 24, int slices = 48);
TriangleMesh makeBoxMesh(double sx = 80.0, double sy = 60.0, double sz = 40.0);
TriangleMesh makeCylinderMesh(double radius = 30.0, double height = 80.0, int slices = 64);

/// Resolves "builtin:<name>" to a generated mesh, otherwise loads the file.
TriangleMesh resolveMesh(const std::string& spec);

/// Defect spec JSON (schema "linescan.defects/1").
void saveDefectSpec(const std::string& path, const DefectSpec& spec);
DefectSpec loadDefectSpec(const std::string& path);

}  // namespace linescan
