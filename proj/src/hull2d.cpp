#include "linescan/hull2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linescan {

namespace {
double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}
}  // namespace

std::vector<Vec2> convexHull2(std::vector<Vec2> points) {
    std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const Vec2& a, const Vec2& b) { return a == b; }),
                 points.end());
    const int n = static_cast<int>(points.size());
    if (n <= 2) return points;

    std::vector<Vec2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    for (int i = n - 2, t = k + 1; i >= 0; --i) {  // upper chain
        while (k >= t && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

Vec2 minWidthDirection(const std::vector<Vec2>& hull) {
    const int n = static_cast<int>(hull.size());
    if (n == 0) return Vec2(1, 0);
    if (n == 1) return Vec2(1, 0);
    if (n == 2) {
        Vec2 e = (hull[1] - hull[0]).normalized();
        return Vec2(-e.y(), e.x());
    }
    double best_width = std::numeric_limits<double>::infinity();
    Vec2 best_dir(1, 0);
    for (int i = 0; i < n; ++i) {
        Vec2 a = hull[i];
        Vec2 b = hull[(i + 1) % n];
        Vec2 e = b - a;
        double len = e.norm();
        if (len < 1e-15) continue;
        e /= len;
        Vec2 normal(-e.y(), e.x());
        double w = 0.0;
        for (const Vec2& p : hull) w = std::max(w, std::abs(normal.dot(p - a)));
        if (w < best_width) {
            best_width = w;
            best_dir = normal;
        }
    }
    // Canonical sign: positive x, or positive y when x is zero.
    if (best_dir.x() < 0.0 || (best_dir.x() == 0.0 && best_dir.y() < 0.0)) best_dir = -best_dir;
    return best_dir;
}

double widthAlong(const std::vector<Vec2>& points, const Vec2& dir) {
    if (points.empty()) return 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Vec2& p : points) {
        double s = dir.dot(p);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return hi - lo;
}

}  // namespace linescan
