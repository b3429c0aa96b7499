#pragma once

#include <Eigen/Core>

#include <vector>

namespace linescan {

using Vec2 = Eigen::Vector2d;

/// Convex hull in counter-clockwise order (monotone chain). Collinear points
/// on the hull border are dropped. Degenerate inputs return what remains:
/// a single point or the two extreme points of a collinear set.
std::vector<Vec2> convexHull2(std::vector<Vec2> points);

/// Direction of minimal projected width of the hull, via rotating calipers:
/// the outward extent measured along the returned unit direction is minimal
/// over all directions. For a 2:1 rectangle this is the direction parallel
/// to its short sides. Degenerate hulls (point/segment) get the perpendicular
/// of the segment, or +x for a single point.
Vec2 minWidthDirection(const std::vector<Vec2>& hull);

/// Width of the point set measured along a unit direction.
double widthAlong(const std::vector<Vec2>& points, const Vec2& dir);

}  // namespace linescan
