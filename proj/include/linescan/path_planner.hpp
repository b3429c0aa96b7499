#pragma once

#include "linescan/geometry.hpp"
#include "linescan/segmentation.hpp"

#include <string>
#include <utility>
#include <vector>

namespace linescan {

/// Line scan camera description. Lengths in millimeters, angles in radians.
/// The defaults describe a short-range sensor whose 8 mm scan line is narrow
/// enough to hold the patch constraints on decimeter-scale convex bodies.
struct CameraSpec {
    double field_of_view = 8.0;    // V_F, lateral scan line extent
    double depth_of_view = 4.0;    // V_D, in-focus depth range
    double working_distance = 80.0;  // w, camera to surface
    double beta = degToRad(10.0);  // max normal deviation inside a patch
    int n_pixels = 100;            // sensor pixels per line
    double pixel_size = 0.08;      // kappa, mm per pixel at unit magnification
    double angle_of_view = 2.0 * std::atan(8.0 / 160.0);  // Theta
    double sensor_diagonal = 15.0;  // delta, mm
    double f_number = 8.0;          // f'
    double focal_length = 16.0;     // f, mm
    double scan_speed = 50.0;       // v, mm/s
};

/// Camera-sized subdivision of a region, in the region's canonical frame
/// (average normal along +z, shortest boundary direction along +x).
struct Patch {
    std::vector<int> point_indices;  // into the canonical region cloud
    Vec3 avg_normal = Vec3::UnitZ();
    Vec3 center = Vec3::Zero();  // epsilon, member centroid
    Vec3 psi1 = Vec3::Zero();    // (x_min, eps_y, eps_z)
    Vec3 psi2 = Vec3::Zero();    // (x_max, eps_y, eps_z)
    double x_min = 0, x_max = 0;
    double y_min = 0, y_max = 0;
    double z_min = 0, z_max = 0;
    double v_l = 0;  // x extent, camera travel per pass
    int subregion = 0;

    double xRange() const { return x_max - x_min; }
    double yRange() const { return y_max - y_min; }
};

/// One six-DOF scan pose: position plus viewing and motion directions.
struct PathPoint {
    Vec3 position = Vec3::Zero();
    Vec3 view_dir = -Vec3::UnitZ();  // camera optical axis, toward surface
    Vec3 motion_dir = Vec3::UnitX();
    int region_id = -1;
    int patch_id = -1;
};

/// Transforms between a region's canonical frame and the object frame.
struct RegionFrame {
    RigidTransform to_world;       // T_inv, canonical -> object
    RigidTransform rot_to_world;   // R_inv, directions only
    Vec3 short_dir = Vec3::UnitX();  // b_j in the object frame
};

struct CompletenessReport {
    bool pass = true;
    std::vector<int> violations;  // patch-local indices outside the scan cube
};

struct RegionSummary {
    int region_id = -1;
    int subregion_count = 0;             // k_j
    std::vector<int> patches_per_subregion;  // Omega^y_js
    int patch_count = 0;                 // Omega_j
};

/// Complete ordered scan path. Points come in (start, stop) pairs per patch.
struct ScanPath {
    std::vector<PathPoint> points;
    std::vector<RegionSummary> regions;  // in visit order
};

/// Planning result for one region before tour ordering.
struct RegionPlan {
    int region_id = -1;
    RegionFrame frame;
    PointCloud canonical_cloud;
    std::vector<Patch> patches;
    std::vector<int> patches_per_subregion;
    int subregion_count = 0;
    std::vector<PathPoint> path_points;  // object frame, 2 per patch
};

/// Moves a region into its canonical frame: the average normal is rotated
/// onto +z, the cloud is dropped onto the x-y plane (mean z becomes 0), and
/// the direction of minimal projected width is rotated onto +x.
std::pair<PointCloud, RegionFrame> canonicalRegionTransform(const PointCloud& region_cloud,
                                                            const Vec3& avg_normal);

/// Splits a canonical region into patches: the x extent is cut into k_j
/// equal slabs and each slab into ceil(y_extent / V_F) strips, growing k_j
/// until every patch fits the scan cube (half-extents V_F/2 and V_D/2 about
/// the patch centroid) and keeps normal deviation below cam.beta.
/// `patches_per_subregion` (when given) receives the per-slab patch counts.
/// Throws when no k_j up to the point count satisfies the constraints.
std::vector<Patch> subdivideRegion(const PointCloud& canonical_cloud, const CameraSpec& cam,
                                   std::vector<int>* patches_per_subregion = nullptr,
                                   int* subregion_count = nullptr);

/// Start/stop poses for one patch, mapped back to the object frame.
std::pair<PathPoint, PathPoint> patchPathPoints(const Patch& patch, const RegionFrame& frame,
                                                const CameraSpec& cam);

/// Checks every patch member against the scan cube spanned by V_L, V_F, V_D.
/// Bounds are inclusive with a 1e-9 mm slack.
CompletenessReport validateCompleteness(const Patch& patch,
                                        const PointCloud& canonical_cloud,
                                        const CameraSpec& cam);

/// Plans one region: canonical transform, subdivision, path points.
RegionPlan planRegion(const PointCloud& cloud, const Region& region,
                      const CameraSpec& cam, int region_id);

/// Greedy nearest-neighbor tour over regions, starting from the first plan.
/// Distance is measured from the last pose of the current region to the
/// first pose of each candidate.
ScanPath orderRegions(const std::vector<RegionPlan>& plans);

/// Full planning pipeline over a segmented cloud. Every emitted patch is
/// re-validated; a completeness failure throws.
ScanPath planScanPath(const PointCloud& cloud, const SegmentationResult& seg,
                      const CameraSpec& cam, std::vector<RegionPlan>* plans_out = nullptr);

/// Scan path JSON (schema "linescan.scanpath/1").
void saveScanPath(const std::string& path, const ScanPath& sp, const CameraSpec& cam);
ScanPath loadScanPath(const std::string& path, CameraSpec* cam_out = nullptr);

}  // namespace linescan
