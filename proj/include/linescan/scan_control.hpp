#pragma once

#include "linescan/geometry.hpp"
#include "linescan/path_planner.hpp"

#include <string>
#include <utility>
#include <vector>

namespace linescan {

/// Six-DOF end-effector pose: position plus rotation vector (axis-angle,
/// magnitude in [0, pi]).
struct RobotPose {
    Vec3 position = Vec3::Zero();
    Vec3 rotation_vec = Vec3::Zero();
    int region_id = -1;
    int patch_id = -1;

    Eigen::Matrix<double, 6, 1> vector() const {
        Eigen::Matrix<double, 6, 1> v;
        v << position, rotation_vec;
        return v;
    }
    RigidTransform toTransform() const;
};

/// A detection mapped from pixel coordinates into 3-d frames.
struct DefectLocation {
    double pixel_x = 0.0;  // i_x, along the motion direction (image row)
    double pixel_y = 0.0;  // i_y, along the sensor line (image column)
    Vec3 local = Vec3::Zero();   // mu, frame of the patch's first path pose
    Vec3 world = Vec3::Zero();   // robot frame
    Vec3 object = Vec3::Zero();  // object frame (through bTo inverse)
    int patch_id = -1;
};

/// V_F = 2*w*tan(Theta/2). Throws on nonpositive inputs or Theta >= pi.
double fieldOfView(double working_distance, double angle_of_view);

/// Circle of confusion c = delta/1500, then V_D = 2*w^2*f'*c / f^2.
double depthOfView(double working_distance, double f_number, double sensor_diagonal,
                   double focal_length);

/// Acquisition line rate phi = n*v / V_F (unit magnification).
double lineRate(int n_pixels, double field_of_view, double speed);

/// Axis-angle vector of a rotation matrix, angle in [0, pi]. At the pi
/// singularity the axis sign is fixed so its largest-magnitude component is
/// positive.
Vec3 rotationToAxisAngle(const Mat3& r);

Mat3 axisAngleToRotation(const Vec3& xi);

/// Maps the object-frame scan path into the robot frame and converts each
/// pose into a 6-vector. The tool frame is x = motion direction, z = optical
/// axis, y completing the right-handed triad. Throws when a path point's
/// view and motion directions deviate from orthogonal by more than 1e-4.
std::vector<std::pair<RobotPose, RobotPose>> pathToRobotFrame(const ScanPath& path,
                                                              const RigidTransform& bTo);

/// Back-projects a pixel: mu = [i_x*k, (i_y - y_max/2)*k, w] in the anchor
/// pose frame, then through the anchor into the robot frame and through
/// bTo^-1 into the object frame.
DefectLocation mapPixelTo3d(double pixel_x, double pixel_y, double pixel_size,
                            double working_distance, double y_max_pixels,
                            const RobotPose& anchor, const RigidTransform& bTo);

/// Robot path JSON (schema "linescan.robotpath/1").
void saveRobotPath(const std::string& path,
                   const std::vector<std::pair<RobotPose, RobotPose>>& poses);
std::vector<std::pair<RobotPose, RobotPose>> loadRobotPath(const std::string& path);

}  // namespace linescan
