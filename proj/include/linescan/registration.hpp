#pragma once

#include "linescan/geometry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace linescan {

struct IcpConfig {
    int max_iterations = 100;
    double convergence_tol = 1e-4;        // mm, RMS change between iterations
    double max_correspondence_dist = 0.0; // mm; <= 0 means 10% of target bbox diagonal
};

struct RegistrationResult {
    RigidTransform transform;  // dTo after ICP, bTo after composition
    double rms_error = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> rms_history;  // one entry per ICP iteration
    double c2c_mean = 0.0;
    double c2c_std = 0.0;
};

/// Options for the boundary stages of registerObject. The neighborhood is
/// larger and the gap stricter than the extractBoundary defaults because the
/// projected model cloud is random scatter, not a grid: with k=12 and a pi/2
/// gap roughly half of all interior points misfire, while true rim points
/// show gaps near pi.
struct BoundaryConfig {
    int k = 24;
    double gap_threshold = 0.7 * kPi;
    double rim_margin_frac = 0.05;  // capture-border zone excluded from rims
};

/// Drops every point onto the plane along the plane normal.
PointCloud projectToPlane(const PointCloud& cloud, const Plane& plane);

/// Composition bTc = bTe * eTm * mTc.
RigidTransform composeHandEye(const RigidTransform& bTe, const RigidTransform& eTm,
                              const RigidTransform& mTc);

/// Point-to-point ICP aligning source onto target. Correspondences come from
/// a kd-tree; each update is the closed-form SVD least-squares fit. Without
/// `initial` the start is centroid alignment with identity rotation.
RegistrationResult icpAlign(const PointCloud& source, const PointCloud& target,
                            const IcpConfig& cfg,
                            const RigidTransform* initial = nullptr);

/// Mean and population standard deviation of nearest-neighbor distances from
/// each point of `a` to `b`.
std::pair<double, double> cloudToCloudError(const PointCloud& a, const PointCloud& b);

/// Full projection registration: projects the model cloud onto the plane,
/// extracts its boundary, extracts the occlusion-hole rim of the captured
/// plane cloud, aligns them with ICP, and composes with bTd. The rim is the
/// part of the capture boundary away from the capture's rectangular border.
/// Throws when no hole rim is found.
RegistrationResult registerObject(const PointCloud& model_cloud, const PointCloud& capture,
                                  const Plane& plane, const RigidTransform& bTd,
                                  const IcpConfig& cfg, const BoundaryConfig& bcfg = {});

/// Hole-rim extraction used by registerObject, exposed for inspection.
PointCloud captureHoleRim(const PointCloud& capture, const Plane& plane,
                          const BoundaryConfig& bcfg);

/// Registration report JSON (schema "linescan.registration/1").
void saveRegistrationReport(const std::string& path, const RegistrationResult& result);
RegistrationResult loadRegistrationReport(const std::string& path);

}  // namespace linescan
