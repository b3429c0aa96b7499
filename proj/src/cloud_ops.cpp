#include "linescan/cloud_ops.hpp"

#include "linescan/kdtree.hpp"
#include "linescan/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

namespace linescan {

PointCloud sampleMesh(const TriangleMesh& mesh, int n_points, std::uint64_t seed) {
    if (n_points < 1) throw std::invalid_argument("sampleMesh: n_points must be >= 1");
    if (mesh.empty()) throw std::invalid_argument("sampleMesh: empty mesh");
    const std::size_t ntri = mesh.triangles.size();

    std::vector<double> areas(ntri);
    double total = 0.0;
    for (std::size_t t = 0; t < ntri; ++t) {
        areas[t] = mesh.triangleArea(t);
        total += areas[t];
    }
    if (total <= 0.0) throw std::invalid_argument("sampleMesh: zero total surface area");

    // Largest-remainder allocation keeps per-triangle counts proportional to
    // area within one point.
    std::vector<int> counts(ntri);
    std::vector<std::pair<double, std::size_t>> remainders(ntri);
    long long assigned = 0;
    for (std::size_t t = 0; t < ntri; ++t) {
        double quota = static_cast<double>(n_points) * areas[t] / total;
        counts[t] = static_cast<int>(quota);
        assigned += counts[t];
        remainders[t] = {quota - counts[t], t};
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (long long r = 0; r < n_points - assigned; ++r) ++counts[remainders[r].second];

    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n_points);
    for (std::size_t t = 0; t < ntri; ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3& b = mesh.vertices[tri[1]];
        const Vec3& c = mesh.vertices[tri[2]];
        for (int s = 0; s < counts[t]; ++s) {
            double u = rng.uniform();
            double v = rng.uniform();
            if (u + v > 1.0) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            cloud.points.push_back(a + u * (b - a) + v * (c - a));
        }
    }
    return cloud;
}

std::vector<Vec3> rayFanDirections(const RayFanConfig& cfg) {
    if (cfg.theta_steps < 4 || cfg.phi_steps < 4)
        throw std::invalid_argument("rayFan: steps must be >= 4");
    if (!(cfg.angular_tolerance > 0.0) || cfg.angular_tolerance >= kPi / 4.0)
        throw std::invalid_argument("rayFan: angular_tolerance out of (0, pi/4)");
    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<std::size_t>(cfg.theta_steps) * cfg.phi_steps);
    for (int ti = 0; ti < cfg.theta_steps; ++ti) {
        // Cell centers avoid duplicated pole rays.
        double theta = kPi * (ti + 0.5) / cfg.theta_steps;
        for (int pi = 0; pi < cfg.phi_steps; ++pi) {
            double phi = 2.0 * kPi * pi / cfg.phi_steps;
            dirs.emplace_back(cfg.radius * std::sin(theta) * std::cos(phi),
                              cfg.radius * std::sin(theta) * std::sin(phi),
                              cfg.radius * std::cos(theta));
        }
    }
    return dirs;
}

std::vector<int> filterExteriorIndices(const PointCloud& cloud, const RayFanConfig& cfg) {
    if (cloud.size() < 4) throw std::invalid_argument("filterExterior: need >= 4 points");
    const Vec3 c = centroid(cloud);
    const double cos_tol = std::cos(cfg.angular_tolerance);
    const std::size_t n = cloud.size();

    // Precompute unit offsets from the centroid. A point at the centroid has
    // no direction and is skipped.
    std::vector<Vec3> unit(n);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 q = cloud.points[i] - c;
        dist[i] = q.norm();
        unit[i] = dist[i] > 1e-12 ? Vec3(q / dist[i]) : Vec3::Zero();
    }

    std::vector<int> selected;
    for (const Vec3& dir : rayFanDirections(cfg)) {
        const Vec3 l = dir.normalized();
        int best = -1;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] <= 1e-12) continue;
            // angle(q_i, l) < tolerance, expressed through the cosine
            if (unit[i].dot(l) > cos_tol && dist[i] > best_dist) {
                best_dist = dist[i];
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) selected.push_back(best);
    }
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    return selected;
}

PointCloud filterExterior(const PointCloud& cloud, const RayFanConfig& cfg) {
    auto idx = filterExteriorIndices(cloud, cfg);
    PointCloud out;
    out.points.reserve(idx.size());
    const bool with_normals = cloud.hasNormals();
    if (with_normals) out.normals.reserve(idx.size());
    for (int i : idx) {
        out.points.push_back(cloud.points[i]);
        if (with_normals) out.normals.push_back(cloud.normals[i]);
    }
    return out;
}

namespace {

/// Neighbor indices excluding the query point itself.
std::vector<int> neighborhood(const KdTree3& tree, const std::vector<Vec3>& pts, int i,
                              int k) {
    std::vector<int> nb = tree.knn(pts[i], k + 1);
    auto self = std::find(nb.begin(), nb.end(), i);
    if (self != nb.end())
        nb.erase(self);
    else
        nb.pop_back();
    return nb;
}

Mat3 neighborhoodCovariance(const std::vector<Vec3>& pts, const std::vector<int>& nb) {
    Vec3 mean = Vec3::Zero();
    for (int j : nb) mean += pts[j];
    mean /= static_cast<double>(nb.size());
    Mat3 cov = Mat3::Zero();
    for (int j : nb) {
        Vec3 d = pts[j] - mean;
        cov += d * d.transpose();
    }
    return cov / static_cast<double>(nb.size());
}

}  // namespace

PointCloud estimateNormals(const PointCloud& cloud, int k) {
    if (k < 3) throw std::invalid_argument("estimateNormals: k must be >= 3");
    if (cloud.size() <= static_cast<std::size_t>(k))
        throw std::invalid_argument("estimateNormals: cloud smaller than k+1");

    const Vec3 c = centroid(cloud);
    KdTree3 tree(cloud.points);
    PointCloud out;
    out.points = cloud.points;
    out.normals.assign(cloud.size(), Vec3::Zero());

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto nb = neighborhood(tree, cloud.points, static_cast<int>(i), k);
        Mat3 cov = neighborhoodCovariance(cloud.points, nb);
        Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
        const Vec3 evals = eig.eigenvalues();  // ascending
        // Rank < 2: collinear or coincident neighborhood, no usable normal.
        if (evals[2] <= 1e-18 || evals[1] <= 1e-12 * evals[2]) continue;
        Vec3 n = eig.eigenvectors().col(0).normalized();
        double side = n.dot(cloud.points[i] - c);
        if (side < -1e-12) {
            n = -n;
        } else if (side <= 1e-12) {
            // Centroid in the local plane: orient the dominant component up.
            int m = 0;
            if (std::abs(n.y()) > std::abs(n[m])) m = 1;
            if (std::abs(n.z()) > std::abs(n[m])) m = 2;
            if (n[m] < 0.0) n = -n;
        }
        out.normals[i] = n;
    }
    return out;
}

std::vector<int> boundaryIndices(const PointCloud& cloud, int k, double gap_threshold) {
    if (k < 3) throw std::invalid_argument("boundaryIndices: k must be >= 3");
    if (cloud.size() <= static_cast<std::size_t>(k))
        throw std::invalid_argument("boundaryIndices: cloud smaller than k+1");

    KdTree3 tree(cloud.points);
    std::vector<int> boundary;
    std::vector<double> angles;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto nb = neighborhood(tree, cloud.points, static_cast<int>(i), k);
        Mat3 cov = neighborhoodCovariance(cloud.points, nb);
        Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
        // Local tangent frame: u along the largest spread, normal along the
        // smallest. Works for the planar clouds this is used on.
        Vec3 u = eig.eigenvectors().col(2);
        Vec3 nrm = eig.eigenvectors().col(0);
        Vec3 v = nrm.cross(u).normalized();

        angles.clear();
        for (int j : nb) {
            Vec3 d = cloud.points[j] - cloud.points[i];
            angles.push_back(std::atan2(d.dot(v), d.dot(u)));
        }
        std::sort(angles.begin(), angles.end());
        double max_gap = angles.front() + 2.0 * kPi - angles.back();
        for (std::size_t a = 1; a < angles.size(); ++a)
            max_gap = std::max(max_gap, angles[a] - angles[a - 1]);
        if (max_gap > gap_threshold) boundary.push_back(static_cast<int>(i));
    }
    return boundary;
}

PointCloud extractBoundary(const PointCloud& cloud, int k, double gap_threshold) {
    auto idx = boundaryIndices(cloud, k, gap_threshold);
    PointCloud out;
    out.points.reserve(idx.size());
    const bool with_normals = cloud.hasNormals();
    if (with_normals) out.normals.reserve(idx.size());
    for (int i : idx) {
        out.points.push_back(cloud.points[i]);
        if (with_normals) out.normals.push_back(cloud.normals[i]);
    }
    return out;
}

}  // namespace linescan
