#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace linescan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

constexpr double kPi = 3.14159265358979323846;

inline double degToRad(double deg) { return deg * kPi / 180.0; }
inline double radToDeg(double rad) { return rad * 180.0 / kPi; }

/// Indexed triangle mesh. Vertex coordinates in millimeters.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    bool empty() const { return triangles.empty(); }
    double triangleArea(std::size_t t) const;
    double totalArea() const;
};

/// Point cloud in millimeters. Normals are optional; when present the vector
/// has the same length as points and a zero entry marks an invalid normal
/// (degenerate neighborhood during estimation).
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool hasNormals() const { return !points.empty() && normals.size() == points.size(); }
    bool validNormal(std::size_t i) const {
        return hasNormals() && normals[i].squaredNorm() > 0.25;
    }
};

/// Rigid map p -> R*p + t.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 applyPoint(const Vec3& p) const { return rotation * p + translation; }
    Vec3 applyDirection(const Vec3& d) const { return rotation * d; }

    RigidTransform inverse() const;
    Mat4 matrix() const;
    bool isRigid(double tol = 1e-9) const;

    static RigidTransform identity() { return {}; }
    static RigidTransform fromMatrix(const Mat4& m);
    static RigidTransform fromTranslation(const Vec3& t) { return {Mat3::Identity(), t}; }
};

/// Composition: (a*b).apply(p) == a.apply(b.apply(p)).
RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

/// Plane A*x + B*y + C*z + D = 0 with (A,B,C) stored unit length.
struct Plane {
    Vec3 normal = Vec3(0, 0, 1);
    double d = 0.0;

    static Plane fromCoefficients(double a, double b, double c, double dd);
    double signedDistance(const Vec3& p) const { return normal.dot(p) + d; }
};

/// Spherical fan of ray directions used by exterior filtering.
struct RayFanConfig {
    int theta_steps = 64;
    int phi_steps = 128;
    double radius = 1.0;              // mm, scales the emitted directions
    double angular_tolerance = 0.05;  // radians, ray membership threshold
};

/// Component-wise mean of the cloud. Throws on an empty cloud.
/// Uses compensated summation so the result is stable for large clouds.
Vec3 centroid(const PointCloud& cloud);

/// Maps positions by R*p + t and normals by R*n.
PointCloud applyTransform(const PointCloud& cloud, const RigidTransform& t);

/// Minimal rotation taking unit vector `from` onto unit vector `to`.
/// Antiparallel inputs rotate 180 degrees about a fixed perpendicular axis
/// (x when possible) so the result is deterministic.
Mat3 rotationBetween(const Vec3& from, const Vec3& to);

std::pair<Vec3, Vec3> boundingBox(const std::vector<Vec3>& points);
double bboxDiagonal(const std::vector<Vec3>& points);

}  // namespace linescan
