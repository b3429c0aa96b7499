#include "linescan/scan_control.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace linescan {

using nlohmann::json;

RigidTransform RobotPose::toTransform() const {
    return RigidTransform{axisAngleToRotation(rotation_vec), position};
}

double fieldOfView(double working_distance, double angle_of_view) {
    if (working_distance <= 0.0) throw std::invalid_argument("fieldOfView: w must be > 0");
    if (!(angle_of_view > 0.0) || angle_of_view >= kPi)
        throw std::invalid_argument("fieldOfView: angle of view out of (0, pi)");
    return 2.0 * working_distance * std::tan(angle_of_view / 2.0);
}

double depthOfView(double working_distance, double f_number, double sensor_diagonal,
                   double focal_length) {
    if (working_distance <= 0.0 || f_number <= 0.0 || sensor_diagonal <= 0.0 ||
        focal_length <= 0.0)
        throw std::invalid_argument("depthOfView: inputs must be > 0");
    double confusion = sensor_diagonal / 1500.0;
    return 2.0 * working_distance * working_distance * f_number * confusion /
           (focal_length * focal_length);
}

double lineRate(int n_pixels, double field_of_view, double speed) {
    if (n_pixels <= 0 || field_of_view <= 0.0 || speed <= 0.0)
        throw std::invalid_argument("lineRate: inputs must be > 0");
    return static_cast<double>(n_pixels) * speed / field_of_view;
}

Vec3 rotationToAxisAngle(const Mat3& r) {
    // Quaternion route: stable at every angle including the pi singularity.
    Eigen::Quaterniond q(r);
    if (q.w() < 0.0) q.coeffs() *= -1.0;
    Vec3 v(q.x(), q.y(), q.z());
    double s = v.norm();
    if (s < 1e-15) return Vec3::Zero();
    double angle = 2.0 * std::atan2(s, q.w());
    Vec3 axis = v / s;
    if (angle > kPi - 1e-9) {
        // Fix the sign at the singularity: largest-magnitude component positive.
        int m = 0;
        if (std::abs(axis.y()) > std::abs(axis[m])) m = 1;
        if (std::abs(axis.z()) > std::abs(axis[m])) m = 2;
        if (axis[m] < 0.0) axis = -axis;
    }
    return angle * axis;
}

Mat3 axisAngleToRotation(const Vec3& xi) {
    double angle = xi.norm();
    if (angle < 1e-15) return Mat3::Identity();
    return Eigen::AngleAxisd(angle, xi / angle).toRotationMatrix();
}

std::vector<std::pair<RobotPose, RobotPose>> pathToRobotFrame(const ScanPath& path,
                                                              const RigidTransform& bTo) {
    if (path.points.size() % 2 != 0)
        throw std::invalid_argument("pathToRobotFrame: path points must come in pairs");

    auto convert = [&bTo](const PathPoint& p) {
        Vec3 eta = bTo.applyDirection(p.view_dir).normalized();
        Vec3 tau = bTo.applyDirection(p.motion_dir);
        if (std::abs(eta.dot(tau.normalized())) > 1e-4)
            throw std::runtime_error("pathToRobotFrame: view/motion not orthogonal");
        // Re-orthogonalize to kill round-off before building the triad.
        tau = (tau - eta * eta.dot(tau)).normalized();
        Mat3 r;
        r.col(0) = tau;             // tool x: motion direction
        r.col(1) = eta.cross(tau);  // tool y
        r.col(2) = eta;             // tool z: optical axis
        RobotPose pose;
        pose.position = bTo.applyPoint(p.position);
        pose.rotation_vec = rotationToAxisAngle(r);
        pose.region_id = p.region_id;
        pose.patch_id = p.patch_id;
        return pose;
    };

    std::vector<std::pair<RobotPose, RobotPose>> out;
    out.reserve(path.points.size() / 2);
    for (std::size_t i = 0; i + 1 < path.points.size(); i += 2)
        out.emplace_back(convert(path.points[i]), convert(path.points[i + 1]));
    return out;
}

DefectLocation mapPixelTo3d(double pixel_x, double pixel_y, double pixel_size,
                            double working_distance, double y_max_pixels,
                            const RobotPose& anchor, const RigidTransform& bTo) {
    DefectLocation loc;
    loc.pixel_x = pixel_x;
    loc.pixel_y = pixel_y;
    loc.patch_id = anchor.patch_id;
    loc.local = Vec3(pixel_x * pixel_size, (pixel_y - y_max_pixels / 2.0) * pixel_size,
                     working_distance);
    RigidTransform a = anchor.toTransform();
    loc.world = a.applyPoint(loc.local);
    loc.object = bTo.inverse().applyPoint(loc.world);
    return loc;
}

void saveRobotPath(const std::string& path,
                   const std::vector<std::pair<RobotPose, RobotPose>>& poses) {
    auto poseToJson = [](const RobotPose& p) {
        return json::array({p.position.x(), p.position.y(), p.position.z(),
                            p.rotation_vec.x(), p.rotation_vec.y(), p.rotation_vec.z()});
    };
    json j;
    j["schema"] = "linescan.robotpath/1";
    json arr = json::array();
    for (const auto& [start, stop] : poses)
        arr.push_back(json{{"region_id", start.region_id},
                           {"patch_id", start.patch_id},
                           {"start", poseToJson(start)},
                           {"stop", poseToJson(stop)}});
    j["poses"] = arr;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

std::vector<std::pair<RobotPose, RobotPose>> loadRobotPath(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j = json::parse(in);
    if (j.at("schema") != "linescan.robotpath/1")
        throw std::runtime_error("unsupported robot path schema in '" + path + "'");
    auto poseFromJson = [](const json& a, int region_id, int patch_id) {
        RobotPose p;
        p.position = Vec3(a.at(0), a.at(1), a.at(2));
        p.rotation_vec = Vec3(a.at(3), a.at(4), a.at(5));
        p.region_id = region_id;
        p.patch_id = patch_id;
        return p;
    };
    std::vector<std::pair<RobotPose, RobotPose>> out;
    for (const auto& e : j.at("poses")) {
        int region_id = e.at("region_id");
        int patch_id = e.at("patch_id");
        out.emplace_back(poseFromJson(e.at("start"), region_id, patch_id),
                         poseFromJson(e.at("stop"), region_id, patch_id));
    }
    return out;
}

}  // namespace linescan
