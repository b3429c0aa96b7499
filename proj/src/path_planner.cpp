#include "linescan/path_planner.hpp"

#include "linescan/hull2d.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace linescan {

using nlohmann::json;

std::pair<PointCloud, RegionFrame> canonicalRegionTransform(const PointCloud& region_cloud,
                                                            const Vec3& avg_normal) {
    if (region_cloud.empty())
        throw std::invalid_argument("canonicalRegionTransform: empty region");

    RigidTransform rz{rotationBetween(avg_normal.normalized(), Vec3::UnitZ()), Vec3::Zero()};
    PointCloud rotated = applyTransform(region_cloud, rz);

    double mean_z = 0.0;
    for (const Vec3& p : rotated.points) mean_z += p.z();
    mean_z /= static_cast<double>(rotated.size());
    RigidTransform tg = RigidTransform::fromTranslation(Vec3(0, 0, -mean_z));

    std::vector<Vec2> projected;
    projected.reserve(rotated.size());
    for (const Vec3& p : rotated.points) projected.emplace_back(p.x(), p.y());
    Vec2 b2 = minWidthDirection(convexHull2(projected));

    // Rotate the minimal-width direction onto +x (rotation about z only, so
    // the plane fit is preserved).
    double ang = std::atan2(b2.y(), b2.x());
    RigidTransform rp{Eigen::AngleAxisd(-ang, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero()};

    RigidTransform forward = rp * tg * rz;
    PointCloud canonical = applyTransform(region_cloud, forward);

    RegionFrame frame;
    frame.to_world = forward.inverse();
    frame.rot_to_world = RigidTransform{(rp.rotation * rz.rotation).transpose(), Vec3::Zero()};
    frame.short_dir = rz.rotation.transpose() * Vec3(b2.x(), b2.y(), 0.0);
    return {std::move(canonical), frame};
}

namespace {

Patch makePatch(const PointCloud& cloud, std::vector<int> idx, int subregion) {
    Patch patch;
    patch.subregion = subregion;
    patch.point_indices = std::move(idx);

    Vec3 sum = Vec3::Zero();
    Vec3 nsum = Vec3::Zero();
    patch.x_min = patch.y_min = patch.z_min = std::numeric_limits<double>::infinity();
    patch.x_max = patch.y_max = patch.z_max = -std::numeric_limits<double>::infinity();
    for (int i : patch.point_indices) {
        const Vec3& p = cloud.points[i];
        sum += p;
        nsum += cloud.normals[i];
        patch.x_min = std::min(patch.x_min, p.x());
        patch.x_max = std::max(patch.x_max, p.x());
        patch.y_min = std::min(patch.y_min, p.y());
        patch.y_max = std::max(patch.y_max, p.y());
        patch.z_min = std::min(patch.z_min, p.z());
        patch.z_max = std::max(patch.z_max, p.z());
    }
    const double n = static_cast<double>(patch.point_indices.size());
    patch.center = sum / n;
    double nlen = nsum.norm();
    patch.avg_normal = nlen > 1e-12 ? Vec3(nsum / nlen) : Vec3::UnitZ();
    patch.psi1 = Vec3(patch.x_min, patch.center.y(), patch.center.z());
    patch.psi2 = Vec3(patch.x_max, patch.center.y(), patch.center.z());
    patch.v_l = patch.x_max - patch.x_min;
    return patch;
}

bool patchAcceptable(const Patch& patch, const PointCloud& cloud, const CameraSpec& cam) {
    const double tol = 1e-9;
    double cos_beta = std::cos(cam.beta);
    for (int i : patch.point_indices) {
        const Vec3& p = cloud.points[i];
        if (std::abs(p.y() - patch.center.y()) > cam.field_of_view / 2.0 + tol) return false;
        if (std::abs(p.z() - patch.center.z()) > cam.depth_of_view / 2.0 + tol) return false;
        if (cloud.normals[i].dot(patch.avg_normal) <= cos_beta) return false;
    }
    return true;
}

}  // namespace

std::vector<Patch> subdivideRegion(const PointCloud& canonical_cloud, const CameraSpec& cam,
                                   std::vector<int>* patches_per_subregion,
                                   int* subregion_count) {
    if (canonical_cloud.empty() || !canonical_cloud.hasNormals())
        throw std::invalid_argument("subdivideRegion: need a canonical cloud with normals");
    const int n = static_cast<int>(canonical_cloud.size());

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    for (const Vec3& p : canonical_cloud.points) {
        x_lo = std::min(x_lo, p.x());
        x_hi = std::max(x_hi, p.x());
    }
    const double x_extent = x_hi - x_lo;

    for (int kj = 1; kj <= n; ++kj) {
        const double slab_w = x_extent / kj;
        std::vector<std::vector<int>> slabs(kj);
        for (int i = 0; i < n; ++i) {
            int s = 0;
            if (slab_w > 0.0)
                s = std::min(kj - 1, static_cast<int>((canonical_cloud.points[i].x() - x_lo) /
                                                      slab_w));
            slabs[s].push_back(i);
        }

        std::vector<Patch> patches;
        std::vector<int> per_subregion(kj, 0);
        bool ok = true;
        for (int s = 0; s < kj && ok; ++s) {
            if (slabs[s].empty()) continue;
            double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
            for (int i : slabs[s]) {
                y_lo = std::min(y_lo, canonical_cloud.points[i].y());
                y_hi = std::max(y_hi, canonical_cloud.points[i].y());
            }
            const double y_extent = y_hi - y_lo;
            const int omega =
                std::max(1, static_cast<int>(std::ceil(y_extent / cam.field_of_view)));
            const double strip_h = y_extent / omega;

            std::vector<std::vector<int>> strips(omega);
            for (int i : slabs[s]) {
                int t = 0;
                if (strip_h > 0.0)
                    t = std::min(omega - 1,
                                 static_cast<int>((canonical_cloud.points[i].y() - y_lo) /
                                                  strip_h));
                strips[t].push_back(i);
            }
            for (int t = 0; t < omega && ok; ++t) {
                if (strips[t].empty()) continue;
                Patch patch = makePatch(canonical_cloud, std::move(strips[t]), s);
                if (!patchAcceptable(patch, canonical_cloud, cam)) {
                    ok = false;
                    break;
                }
                patches.push_back(std::move(patch));
                ++per_subregion[s];
            }
        }
        if (ok) {
            if (patches_per_subregion) *patches_per_subregion = std::move(per_subregion);
            if (subregion_count) *subregion_count = kj;
            return patches;
        }
    }
    throw std::runtime_error(
        "subdivideRegion: surface too curved for the camera (no subdivision satisfies "
        "the scan constraints)");
}

std::pair<PathPoint, PathPoint> patchPathPoints(const Patch& patch, const RegionFrame& frame,
                                                const CameraSpec& cam) {
    // In the canonical frame the patch normal is +z by construction, so the
    // camera sits working_distance above psi and looks straight down.
    const Vec3 lift(0, 0, cam.working_distance);
    const Vec3 eta(0, 0, -1);
    const Vec3 tau(1, 0, 0);

    PathPoint a, b;
    a.position = frame.to_world.applyPoint(patch.psi1 + lift);
    b.position = frame.to_world.applyPoint(patch.psi2 + lift);
    a.view_dir = b.view_dir = frame.rot_to_world.applyDirection(eta).normalized();
    a.motion_dir = b.motion_dir = frame.rot_to_world.applyDirection(tau).normalized();
    return {a, b};
}

CompletenessReport validateCompleteness(const Patch& patch,
                                        const PointCloud& canonical_cloud,
                                        const CameraSpec& cam) {
    CompletenessReport report;
    const double tol = 1e-9;
    const Vec3 d(1, 0, 0);
    for (std::size_t local = 0; local < patch.point_indices.size(); ++local) {
        const Vec3& t = canonical_cloud.points[patch.point_indices[local]];
        double lambda = (t - patch.psi1).dot(d);
        bool ok = lambda >= -tol && lambda <= patch.v_l + tol &&
                  std::abs(t.y() - patch.center.y()) <= cam.field_of_view / 2.0 + tol &&
                  std::abs(t.z() - patch.center.z()) <= cam.depth_of_view / 2.0 + tol;
        if (!ok) report.violations.push_back(static_cast<int>(local));
    }
    report.pass = report.violations.empty();
    return report;
}

RegionPlan planRegion(const PointCloud& cloud, const Region& region, const CameraSpec& cam,
                      int region_id) {
    PointCloud region_cloud;
    region_cloud.points.reserve(region.point_indices.size());
    region_cloud.normals.reserve(region.point_indices.size());
    for (int i : region.point_indices) {
        region_cloud.points.push_back(cloud.points[i]);
        region_cloud.normals.push_back(cloud.normals[i]);
    }

    RegionPlan plan;
    plan.region_id = region_id;
    auto [canonical, frame] = canonicalRegionTransform(region_cloud, region.avg_normal);
    plan.frame = frame;
    plan.canonical_cloud = std::move(canonical);
    plan.patches = subdivideRegion(plan.canonical_cloud, cam, &plan.patches_per_subregion,
                                   &plan.subregion_count);

    for (std::size_t p = 0; p < plan.patches.size(); ++p) {
        auto [a, b] = patchPathPoints(plan.patches[p], plan.frame, cam);
        a.region_id = b.region_id = region_id;
        a.patch_id = b.patch_id = static_cast<int>(p);
        plan.path_points.push_back(a);
        plan.path_points.push_back(b);
    }
    return plan;
}

ScanPath orderRegions(const std::vector<RegionPlan>& plans) {
    if (plans.empty()) throw std::invalid_argument("orderRegions: no regions");
    const int n = static_cast<int>(plans.size());
    std::vector<bool> visited(n, false);

    ScanPath path;
    int current = 0;
    visited[0] = true;
    auto appendPlan = [&path](const RegionPlan& plan) {
        RegionSummary summary;
        summary.region_id = plan.region_id;
        summary.subregion_count = plan.subregion_count;
        summary.patches_per_subregion = plan.patches_per_subregion;
        summary.patch_count = static_cast<int>(plan.patches.size());
        path.regions.push_back(std::move(summary));
        path.points.insert(path.points.end(), plan.path_points.begin(),
                           plan.path_points.end());
    };
    appendPlan(plans[0]);

    for (int step = 1; step < n; ++step) {
        const Vec3& from = plans[current].path_points.back().position;
        int next = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (visited[j]) continue;
            double dist = (plans[j].path_points.front().position - from).norm();
            if (dist < best) {
                best = dist;
                next = j;
            }
        }
        visited[next] = true;
        current = next;
        appendPlan(plans[next]);
    }
    return path;
}

ScanPath planScanPath(const PointCloud& cloud, const SegmentationResult& seg,
                      const CameraSpec& cam, std::vector<RegionPlan>* plans_out) {
    std::vector<RegionPlan> plans;
    plans.reserve(seg.regions.size());
    for (std::size_t r = 0; r < seg.regions.size(); ++r) {
        RegionPlan plan = planRegion(cloud, seg.regions[r], cam, static_cast<int>(r));
        for (const Patch& patch : plan.patches) {
            auto report = validateCompleteness(patch, plan.canonical_cloud, cam);
            if (!report.pass)
                throw std::runtime_error("planScanPath: patch fails completeness in region " +
                                         std::to_string(r));
        }
        plans.push_back(std::move(plan));
    }
    ScanPath path = orderRegions(plans);
    if (plans_out) *plans_out = std::move(plans);
    return path;
}

namespace {

json vecToJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vecFromJson(const json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

json pointToJson(const PathPoint& p) {
    return json{{"pos", vecToJson(p.position)},
                {"view", vecToJson(p.view_dir)},
                {"motion", vecToJson(p.motion_dir)}};
}

PathPoint pointFromJson(const json& j, int region_id, int patch_id) {
    PathPoint p;
    p.position = vecFromJson(j.at("pos"));
    p.view_dir = vecFromJson(j.at("view"));
    p.motion_dir = vecFromJson(j.at("motion"));
    p.region_id = region_id;
    p.patch_id = patch_id;
    return p;
}

json cameraToJson(const CameraSpec& cam) {
    return json{{"field_of_view", cam.field_of_view},
                {"depth_of_view", cam.depth_of_view},
                {"working_distance", cam.working_distance},
                {"beta", cam.beta},
                {"n_pixels", cam.n_pixels},
                {"pixel_size", cam.pixel_size},
                {"angle_of_view", cam.angle_of_view},
                {"sensor_diagonal", cam.sensor_diagonal},
                {"f_number", cam.f_number},
                {"focal_length", cam.focal_length},
                {"scan_speed", cam.scan_speed}};
}

CameraSpec cameraFromJson(const json& j) {
    CameraSpec cam;
    cam.field_of_view = j.at("field_of_view");
    cam.depth_of_view = j.at("depth_of_view");
    cam.working_distance = j.at("working_distance");
    cam.beta = j.at("beta");
    cam.n_pixels = j.at("n_pixels");
    cam.pixel_size = j.at("pixel_size");
    cam.angle_of_view = j.at("angle_of_view");
    cam.sensor_diagonal = j.at("sensor_diagonal");
    cam.f_number = j.at("f_number");
    cam.focal_length = j.at("focal_length");
    cam.scan_speed = j.at("scan_speed");
    return cam;
}

}  // namespace

void saveScanPath(const std::string& path, const ScanPath& sp, const CameraSpec& cam) {
    json j;
    j["schema"] = "linescan.scanpath/1";
    j["camera"] = cameraToJson(cam);
    json regions = json::array();
    for (const auto& r : sp.regions)
        regions.push_back(json{{"region_id", r.region_id},
                               {"subregion_count", r.subregion_count},
                               {"patches_per_subregion", r.patches_per_subregion},
                               {"patch_count", r.patch_count}});
    j["regions"] = regions;
    json pairs = json::array();
    for (std::size_t i = 0; i + 1 < sp.points.size(); i += 2) {
        const PathPoint& a = sp.points[i];
        pairs.push_back(json{{"region_id", a.region_id},
                             {"patch_id", a.patch_id},
                             {"start", pointToJson(a)},
                             {"stop", pointToJson(sp.points[i + 1])}});
    }
    j["points"] = pairs;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

ScanPath loadScanPath(const std::string& path, CameraSpec* cam_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j = json::parse(in);
    if (j.at("schema") != "linescan.scanpath/1")
        throw std::runtime_error("unsupported scan path schema in '" + path + "'");
    if (cam_out) *cam_out = cameraFromJson(j.at("camera"));
    ScanPath sp;
    for (const auto& r : j.at("regions")) {
        RegionSummary s;
        s.region_id = r.at("region_id");
        s.subregion_count = r.at("subregion_count");
        s.patches_per_subregion = r.at("patches_per_subregion").get<std::vector<int>>();
        s.patch_count = r.at("patch_count");
        sp.regions.push_back(std::move(s));
    }
    for (const auto& pr : j.at("points")) {
        int region_id = pr.at("region_id");
        int patch_id = pr.at("patch_id");
        sp.points.push_back(pointFromJson(pr.at("start"), region_id, patch_id));
        sp.points.push_back(pointFromJson(pr.at("stop"), region_id, patch_id));
    }
    return sp;
}

}  // namespace linescan
