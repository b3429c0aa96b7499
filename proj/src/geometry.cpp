#include "linescan/geometry.hpp"

namespace linescan {

double TriangleMesh::triangleArea(std::size_t t) const {
    const auto& tri = triangles[t];
    const Vec3& a = vertices[tri[0]];
    const Vec3& b = vertices[tri[1]];
    const Vec3& c = vertices[tri[2]];
    return 0.5 * (b - a).cross(c - a).norm();
}

double TriangleMesh::totalArea() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) sum += triangleArea(t);
    return sum;
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

Mat4 RigidTransform::matrix() const {
    Mat4 m = Mat4::Identity();
    m.block<3, 3>(0, 0) = rotation;
    m.block<3, 1>(0, 3) = translation;
    return m;
}

bool RigidTransform::isRigid(double tol) const {
    Mat3 rtr = rotation.transpose() * rotation;
    if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform RigidTransform::fromMatrix(const Mat4& m) {
    RigidTransform t;
    t.rotation = m.block<3, 3>(0, 0);
    t.translation = m.block<3, 1>(0, 3);
    return t;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform c;
    c.rotation = a.rotation * b.rotation;
    c.translation = a.rotation * b.translation + a.translation;
    return c;
}

Plane Plane::fromCoefficients(double a, double b, double c, double dd) {
    Vec3 n(a, b, c);
    double len = n.norm();
    if (len < 1e-12) throw std::invalid_argument("plane: zero normal");
    return Plane{n / len, dd / len};
}

Vec3 centroid(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("centroid: empty cloud");
    // Kahan compensated sum per component.
    Vec3 sum = Vec3::Zero();
    Vec3 comp = Vec3::Zero();
    for (const Vec3& p : cloud.points) {
        Vec3 y = p - comp;
        Vec3 t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(cloud.size());
}

PointCloud applyTransform(const PointCloud& cloud, const RigidTransform& t) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) out.points.push_back(t.applyPoint(p));
    if (cloud.hasNormals()) {
        out.normals.reserve(cloud.size());
        for (const Vec3& n : cloud.normals) out.normals.push_back(t.applyDirection(n));
    }
    return out;
}

Mat3 rotationBetween(const Vec3& from, const Vec3& to) {
    Vec3 axis = from.cross(to);
    double s = axis.norm();
    double c = from.dot(to);
    if (s < 1e-12) {
        if (c > 0.0) return Mat3::Identity();
        // Antiparallel: 180 degrees about a perpendicular axis, x preferred.
        Vec3 seed = std::abs(from.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
        Vec3 perp = (seed - from * seed.dot(from)).normalized();
        return Eigen::AngleAxisd(kPi, perp).toRotationMatrix();
    }
    axis /= s;
    return Eigen::AngleAxisd(std::atan2(s, c), axis).toRotationMatrix();
}

std::pair<Vec3, Vec3> boundingBox(const std::vector<Vec3>& points) {
    if (points.empty()) throw std::invalid_argument("boundingBox: no points");
    Vec3 lo = points.front(), hi = points.front();
    for (const Vec3& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

double bboxDiagonal(const std::vector<Vec3>& points) {
    auto [lo, hi] = boundingBox(points);
    return (hi - lo).norm();
}

}  // namespace linescan
