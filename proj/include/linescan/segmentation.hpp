#pragma once

#include "linescan/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace linescan {

/// A cluster of points with similar normals.
struct Region {
    std::vector<int> point_indices;  // into the segmented cloud
    Vec3 avg_normal = Vec3::Zero();
    double max_angle = 0.0;  // max over members of angle(normal_i, avg_normal)
};

struct SegmentationConfig {
    double gamma = degToRad(20.0);  // region convergence threshold
    int initial_k = 1;
    int max_k = 512;
    int max_inner_iters = 100;
    std::uint64_t seed = 0;
};

struct SegmentationResult {
    std::vector<Region> regions;
    int final_k = 0;
    std::vector<int> sigma_history;  // converged-region counts per inner iteration
    bool converged = false;
};

/// Normalized arithmetic mean of unit vectors. Throws when the mean vector
/// vanishes (antipodal cancellation).
Vec3 averageNormal(const std::vector<Vec3>& normals);

/// Angle between unit vectors, in [0, pi].
double angleBetween(const Vec3& a, const Vec3& b);

/// Clusters point normals into near-flat regions. K starts at
/// cfg.initial_k and grows until every region's max member angle drops below
/// cfg.gamma. The inner loop reassigns points to the closest region normal
/// and re-averages while the converged-region count sigma keeps increasing;
/// empty clusters are re-seeded from the worst region's farthest member.
/// When max_k is exhausted the best partition seen is returned with
/// converged = false.
SegmentationResult kmeansSegment(const PointCloud& cloud, const SegmentationConfig& cfg);

/// Writes the cloud as colored PLY, one color per region.
void writeRegionPly(const std::string& path, const PointCloud& cloud,
                    const SegmentationResult& seg);

}  // namespace linescan
