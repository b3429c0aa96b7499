#pragma once

#include "linescan/geometry.hpp"

#include <cstdint>
#include <vector>

namespace linescan {

/// Samples `n_points` on the mesh surface. Points are allocated to triangles
/// proportionally to area (largest-remainder rounding, so counts are exact to
/// within one point) and placed with uniform barycentric coordinates.
/// Deterministic for a fixed seed. Throws when the mesh has zero total area.
PointCloud sampleMesh(const TriangleMesh& mesh, int n_points, std::uint64_t seed);

/// The ray directions emitted from the cloud centroid by filterExterior,
/// in evaluation order. Exposed so independent checks can reuse the fan.
std::vector<Vec3> rayFanDirections(const RayFanConfig& cfg);

/// Keeps, for every ray of the fan, the point farthest from the centroid
/// among the points whose angle to the ray is below cfg.angular_tolerance.
/// Points selected by several rays appear once; the output preserves input
/// order and is always a subset of the input.
PointCloud filterExterior(const PointCloud& cloud, const RayFanConfig& cfg);

/// Index-returning variant of filterExterior (ascending, no duplicates).
std::vector<int> filterExteriorIndices(const PointCloud& cloud, const RayFanConfig& cfg);

/// Per-point PCA normals over k nearest neighbors, oriented away from the
/// cloud centroid. A neighborhood of rank < 2 yields an invalid (zero)
/// normal; consumers skip those points. Requires cloud.size() > k >= 3.
PointCloud estimateNormals(const PointCloud& cloud, int k);

/// Marks points whose k-neighborhood, projected into the local tangent
/// plane, leaves an angular gap bigger than gap_threshold between
/// consecutive neighbor directions. Intended for near-planar clouds.
/// Throws when cloud.size() <= k.
std::vector<int> boundaryIndices(const PointCloud& cloud, int k, double gap_threshold);

PointCloud extractBoundary(const PointCloud& cloud, int k, double gap_threshold);

}  // namespace linescan
