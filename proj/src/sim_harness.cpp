#include "linescan/sim_harness.hpp"

#include "linescan/hull2d.hpp"
#include "linescan/mesh_io.hpp"
#include "linescan/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

namespace linescan {

using nlohmann::json;

namespace {

struct PlaneFrame {
    Vec3 origin;
    Vec3 u, v;
};

PlaneFrame planeFrame(const Plane& plane) {
    Vec3 seed = std::abs(plane.normal.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    Vec3 u = (seed - plane.normal * seed.dot(plane.normal)).normalized();
    return PlaneFrame{-plane.d * plane.normal, u, plane.normal.cross(u)};
}

bool pointInTriangle2(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    auto cross = [](const Vec2& o, const Vec2& q, const Vec2& r) {
        return (q.x() - o.x()) * (r.y() - o.y()) - (q.y() - o.y()) * (r.x() - o.x());
    };
    const double eps = 1e-12;
    double d1 = cross(a, b, p);
    double d2 = cross(b, c, p);
    double d3 = cross(c, a, p);
    bool has_neg = d1 < -eps || d2 < -eps || d3 < -eps;
    bool has_pos = d1 > eps || d2 > eps || d3 > eps;
    return !(has_neg && has_pos);
}

}  // namespace

bool insideSilhouette(const TriangleMesh& mesh, const RigidTransform& pose,
                      const Plane& plane, const Vec3& plane_point) {
    PlaneFrame f = planeFrame(plane);
    Vec2 p((plane_point - f.origin).dot(f.u), (plane_point - f.origin).dot(f.v));
    for (const auto& tri : mesh.triangles) {
        Vec2 uv[3];
        for (int k = 0; k < 3; ++k) {
            Vec3 w = pose.applyPoint(mesh.vertices[tri[k]]) - f.origin;
            uv[k] = Vec2(w.dot(f.u), w.dot(f.v));
        }
        if (pointInTriangle2(p, uv[0], uv[1], uv[2])) return true;
    }
    return false;
}

PointCloud synthDepthCapture(const SceneSpec& scene) {
    if (scene.grid_spacing <= 0.0)
        throw std::invalid_argument("synthDepthCapture: grid_spacing must be > 0");
    if (scene.object.empty()) throw std::invalid_argument("synthDepthCapture: empty object");

    const PlaneFrame f = planeFrame(scene.plane);
    const double s = scene.grid_spacing;

    // Posed mesh in plane coordinates.
    std::vector<std::array<Vec2, 3>> tris;
    tris.reserve(scene.object.triangles.size());
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
    double v_lo = u_lo, v_hi = -u_lo;
    for (const auto& tri : scene.object.triangles) {
        std::array<Vec2, 3> t2;
        for (int k = 0; k < 3; ++k) {
            Vec3 w = scene.true_pose.applyPoint(scene.object.vertices[tri[k]]) - f.origin;
            t2[k] = Vec2(w.dot(f.u), w.dot(f.v));
            u_lo = std::min(u_lo, t2[k].x());
            u_hi = std::max(u_hi, t2[k].x());
            v_lo = std::min(v_lo, t2[k].y());
            v_hi = std::max(v_hi, t2[k].y());
        }
        tris.push_back(t2);
    }

    // Lattice indices anchored at the plane origin so equal pose shifts by a
    // lattice multiple shift the hole identically.
    const long i_lo = static_cast<long>(std::floor((u_lo - scene.grid_margin) / s));
    const long i_hi = static_cast<long>(std::ceil((u_hi + scene.grid_margin) / s));
    const long j_lo = static_cast<long>(std::floor((v_lo - scene.grid_margin) / s));
    const long j_hi = static_cast<long>(std::ceil((v_hi + scene.grid_margin) / s));
    const long nu = i_hi - i_lo + 1;
    const long nv = j_hi - j_lo + 1;

    // Rasterize silhouette triangles into a removal mask.
    std::vector<std::uint8_t> removed(static_cast<std::size_t>(nu) * nv, 0);
    for (const auto& t2 : tris) {
        double tu_lo = std::min({t2[0].x(), t2[1].x(), t2[2].x()});
        double tu_hi = std::max({t2[0].x(), t2[1].x(), t2[2].x()});
        double tv_lo = std::min({t2[0].y(), t2[1].y(), t2[2].y()});
        double tv_hi = std::max({t2[0].y(), t2[1].y(), t2[2].y()});
        long ci_lo = std::max(i_lo, static_cast<long>(std::floor(tu_lo / s)));
        long ci_hi = std::min(i_hi, static_cast<long>(std::ceil(tu_hi / s)));
        long cj_lo = std::max(j_lo, static_cast<long>(std::floor(tv_lo / s)));
        long cj_hi = std::min(j_hi, static_cast<long>(std::ceil(tv_hi / s)));
        for (long j = cj_lo; j <= cj_hi; ++j)
            for (long i = ci_lo; i <= ci_hi; ++i) {
                std::size_t idx = static_cast<std::size_t>(j - j_lo) * nu + (i - i_lo);
                if (removed[idx]) continue;
                if (pointInTriangle2(Vec2(i * s, j * s), t2[0], t2[1], t2[2]))
                    removed[idx] = 1;
            }
    }

    Rng rng(scene.seed);
    PointCloud capture;
    bool any_removed = false;
    for (long j = j_lo; j <= j_hi; ++j)
        for (long i = i_lo; i <= i_hi; ++i) {
            std::size_t idx = static_cast<std::size_t>(j - j_lo) * nu + (i - i_lo);
            if (removed[idx]) {
                any_removed = true;
                continue;
            }
            Vec3 p = f.origin + (i * s) * f.u + (j * s) * f.v;
            if (scene.depth_noise_sigma > 0.0)
                p += scene.plane.normal * rng.normal(0.0, scene.depth_noise_sigma);
            capture.points.push_back(p);
        }
    (void)any_removed;
    if (capture.empty())
        throw std::runtime_error("synthDepthCapture: silhouette covers the whole grid");
    return capture;
}

namespace {

struct PatchRayFrame {
    Vec3 cam0;      // start camera position
    Vec3 eta;       // optical axis, unit
    Vec3 tau;       // motion direction, unit
    Vec3 lateral;   // eta x tau
    double v_l;     // travel length
    int rows, cols;
};

PatchRayFrame patchRayFrame(const PathPoint& start, const PathPoint& stop,
                            const CameraSpec& cam, const RigidTransform& err) {
    PatchRayFrame fr;
    fr.cam0 = err.applyPoint(start.position);
    Vec3 cam1 = err.applyPoint(stop.position);
    fr.eta = err.applyDirection(start.view_dir).normalized();
    Vec3 travel = cam1 - fr.cam0;
    fr.v_l = travel.norm();
    fr.tau = fr.v_l > 1e-12 ? Vec3(travel / fr.v_l)
                            : err.applyDirection(start.motion_dir).normalized();
    fr.lateral = fr.eta.cross(fr.tau);
    fr.rows = std::max(1, static_cast<int>(std::ceil(fr.v_l / cam.pixel_size - 1e-9)));
    fr.cols = cam.n_pixels;
    return fr;
}

/// Lit test shared by the simulator and the footprint oracle: the pixel ray
/// passes within the defect radius, at a depth inside the depth of view.
bool rayHitsDefect(const PatchRayFrame& fr, const CameraSpec& cam, int row, int col,
                   const Defect& defect) {
    Vec3 origin = fr.cam0 + ((row + 0.5) * cam.pixel_size) * fr.tau +
                  ((col + 0.5) - fr.cols / 2.0) * cam.pixel_size * fr.lateral;
    Vec3 rel = defect.point - origin;
    double depth = rel.dot(fr.eta);
    if (std::abs(depth - cam.working_distance) > cam.depth_of_view / 2.0 + defect.radius)
        return false;
    double line_dist2 = (rel - depth * fr.eta).squaredNorm();
    return line_dist2 <= defect.radius * defect.radius;
}

}  // namespace

ScanSimResult simulateLineScan(const DefectSpec& defects, const ScanPath& path,
                               const CameraSpec& cam, const PointCloud& exterior,
                               const RigidTransform* pose_error) {
    if (path.points.empty() || path.points.size() % 2 != 0)
        throw std::invalid_argument("simulateLineScan: path points must come in pairs");
    const RigidTransform err = pose_error ? *pose_error : RigidTransform::identity();

    ScanSimResult result;
    const std::uint8_t bg = result.background;

    for (std::size_t m = 0; m + 1 < path.points.size(); m += 2) {
        const PathPoint& start = path.points[m];
        const PathPoint& stop = path.points[m + 1];
        PatchRayFrame fr = patchRayFrame(start, stop, cam, err);

        GrayImage img(fr.cols, fr.rows, bg);
        for (const Defect& defect : defects.defects) {
            // Narrow the loop to the defect's pixel neighborhood.
            Vec3 rel0 = defect.point - fr.cam0;
            double row_c = rel0.dot(fr.tau) / cam.pixel_size - 0.5;
            double col_c = rel0.dot(fr.lateral) / cam.pixel_size - 0.5 + fr.cols / 2.0;
            double r_px = defect.radius / cam.pixel_size + 1.0;
            int r0 = std::max(0, static_cast<int>(std::floor(row_c - r_px)));
            int r1 = std::min(fr.rows - 1, static_cast<int>(std::ceil(row_c + r_px)));
            int c0 = std::max(0, static_cast<int>(std::floor(col_c - r_px)));
            int c1 = std::min(fr.cols - 1, static_cast<int>(std::ceil(col_c + r_px)));
            double lit = std::clamp(bg + defect.contrast, 0.0, 255.0);
            for (int r = r0; r <= r1; ++r)
                for (int c = c0; c <= c1; ++c)
                    if (rayHitsDefect(fr, cam, r, c, defect))
                        img.at(c, r) = static_cast<std::uint8_t>(lit);
        }
        result.images.push_back(std::move(img));
        result.meta.push_back(
            PatchImageMeta{start.region_id, start.patch_id, fr.rows, fr.cols, start, stop});
    }

    // Coverage: exterior points inside at least one scan cube (design path,
    // without the pose error, since this checks the plan itself).
    if (!exterior.empty()) {
        const double tol = 1e-9;
        std::size_t covered = 0;
        for (const Vec3& p : exterior.points) {
            bool inside = false;
            for (std::size_t m = 0; m + 1 < path.points.size() && !inside; m += 2) {
                const PathPoint& a = path.points[m];
                const PathPoint& b = path.points[m + 1];
                Vec3 eta = a.view_dir.normalized();
                Vec3 travel = b.position - a.position;
                double v_l = travel.norm();
                Vec3 tau = v_l > 1e-12 ? Vec3(travel / v_l) : a.motion_dir.normalized();
                Vec3 lateral = eta.cross(tau);
                Vec3 anchor = a.position + cam.working_distance * eta;  // psi1
                Vec3 rel = p - anchor;
                double lx = rel.dot(tau);
                double ly = rel.dot(lateral);
                double lz = rel.dot(-eta);
                inside = lx >= -tol && lx <= v_l + tol &&
                         std::abs(ly) <= cam.field_of_view / 2.0 + tol &&
                         std::abs(lz) <= cam.depth_of_view / 2.0 + tol;
            }
            if (inside) ++covered;
        }
        result.coverage = static_cast<double>(covered) / static_cast<double>(exterior.size());
    }
    return result;
}

DefectFootprint defectFootprint(const Defect& defect, const PathPoint& start,
                                const PathPoint& stop, const CameraSpec& cam,
                                const RigidTransform* pose_error) {
    const RigidTransform err = pose_error ? *pose_error : RigidTransform::identity();
    PatchRayFrame fr = patchRayFrame(start, stop, cam, err);

    Vec3 rel0 = defect.point - fr.cam0;
    double row_c = rel0.dot(fr.tau) / cam.pixel_size - 0.5;
    double col_c = rel0.dot(fr.lateral) / cam.pixel_size - 0.5 + fr.cols / 2.0;
    double r_px = defect.radius / cam.pixel_size + 1.0;

    DefectFootprint fp;
    int r0 = static_cast<int>(std::floor(row_c - r_px));
    int r1 = static_cast<int>(std::ceil(row_c + r_px));
    int c0 = static_cast<int>(std::floor(col_c - r_px));
    int c1 = static_cast<int>(std::ceil(col_c + r_px));
    fp.clipped = r0 < 0 || c0 < 0 || r1 >= fr.rows || c1 >= fr.cols;
    r0 = std::max(0, r0);
    c0 = std::max(0, c0);
    r1 = std::min(fr.rows - 1, r1);
    c1 = std::min(fr.cols - 1, c1);

    PixelBox box{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
    int count = 0;
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            if (rayHitsDefect(fr, cam, r, c, defect)) {
                ++count;
                box.x0 = std::min(box.x0, c);
                box.x1 = std::max(box.x1, c);
                box.y0 = std::min(box.y0, r);
                box.y1 = std::max(box.y1, r);
            }
    fp.pixels = count;
    if (count > 0) fp.box = box;
    return fp;
}

DefectSpec placeDefects(const std::vector<RegionPlan>& plans, const CameraSpec& cam,
                        int count, double radius, double contrast, std::uint64_t seed) {
    // Candidate sites: patch members ranked by distance from the patch border
    // in the canonical frame. A site is kept when every patch image either
    // shows its full blob away from the borders or nothing at all.
    struct Candidate {
        Vec3 point;
        double margin;
    };
    std::vector<Candidate> candidates;
    for (const RegionPlan& plan : plans) {
        for (const Patch& patch : plan.patches) {
            for (int local : patch.point_indices) {
                const Vec3& p = plan.canonical_cloud.points[local];
                double mx = std::min(p.x() - patch.x_min, patch.x_max - p.x());
                double my = cam.field_of_view / 2.0 - std::abs(p.y() - patch.center.y());
                double margin = std::min(mx, my);
                if (margin < radius + 4.0 * cam.pixel_size) continue;
                candidates.push_back({plan.frame.to_world.applyPoint(p), margin});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.margin != b.margin) return a.margin > b.margin;
        if (a.point.x() != b.point.x()) return a.point.x() < b.point.x();
        if (a.point.y() != b.point.y()) return a.point.y() < b.point.y();
        return a.point.z() < b.point.z();
    });

    // Deterministic shuffle of the acceptance order so sites spread over the
    // object instead of clustering on the widest patch.
    Rng rng(seed);
    for (std::size_t i = candidates.size(); i > 1; --i)
        std::swap(candidates[i - 1], candidates[rng.uniformInt(static_cast<int>(i))]);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.margin > b.margin; });

    auto blobIsolated = [&](const Vec3& site) {
        Defect d{site, radius, contrast};
        for (const RegionPlan& plan : plans)
            for (std::size_t m = 0; m + 1 < plan.path_points.size(); m += 2) {
                DefectFootprint fp = defectFootprint(d, plan.path_points[m],
                                                     plan.path_points[m + 1], cam);
                if (fp.pixels == 0) continue;
                if (fp.clipped) return false;
                double expect = kPi * (radius / cam.pixel_size) * (radius / cam.pixel_size);
                if (fp.pixels < static_cast<int>(0.7 * expect)) return false;
            }
        return true;
    };

    DefectSpec spec;
    spec.seed = seed;
    const double min_sep = 4.0 * radius;
    for (const Candidate& cand : candidates) {
        if (static_cast<int>(spec.defects.size()) >= count) break;
        bool clear = true;
        for (const Defect& d : spec.defects)
            if ((d.point - cand.point).norm() < min_sep) {
                clear = false;
                break;
            }
        if (!clear) continue;
        if (!blobIsolated(cand.point)) continue;
        spec.defects.push_back(Defect{cand.point, radius, contrast});
    }
    return spec;
}

namespace {

void appendQuad(TriangleMesh& mesh, int a, int b, int c, int d) {
    mesh.triangles.push_back({a, b, c});
    mesh.triangles.push_back({a, c, d});
}

TriangleMesh latLongSurface(int stacks, int slices,
                            const std::function<Vec3(double, double)>& surf) {
    // theta in [0, pi] from +x pole to -x pole, phi around.
    TriangleMesh mesh;
    mesh.vertices.push_back(surf(0.0, 0.0));
    for (int i = 1; i < stacks; ++i) {
        double theta = kPi * i / stacks;
        for (int j = 0; j < slices; ++j)
            mesh.vertices.push_back(surf(theta, 2.0 * kPi * j / slices));
    }
    mesh.vertices.push_back(surf(kPi, 0.0));
    const int last = static_cast<int>(mesh.vertices.size()) - 1;

    auto ring = [slices](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };
    for (int j = 0; j < slices; ++j) mesh.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
    for (int i = 1; i + 1 < stacks; ++i)
        for (int j = 0; j < slices; ++j)
            appendQuad(mesh, ring(i, j), ring(i + 1, j), ring(i + 1, j + 1), ring(i, j + 1));
    for (int j = 0; j < slices; ++j)
        mesh.triangles.push_back({last, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
    return mesh;
}

}  // namespace

TriangleMesh makeMirrorMesh() {
    // Egg-shaped convex body: an ellipsoid whose cross-section swells toward
    // one end. The asymmetric outline keeps boundary registration
    // unambiguous; the axes are chosen round enough that a line scan camera
    // with a few-millimeter field of view can satisfy the patch constraints.
    const double a = 60.0, b = 48.0, c = 40.0, egg = 0.12;
    return latLongSurface(28, 56, [=](double theta, double phi) {
        double bulge = 1.0 + egg * std::cos(theta);
        return Vec3(a * std::cos(theta), b * std::sin(theta) * std::cos(phi) * bulge,
                    c * std::sin(theta) * std::sin(phi) * bulge);
    });
}

TriangleMesh makeSphereMesh(double radius, int stacks, int slices) {
    return latLongSurface(stacks, slices, [radius](double theta, double phi) {
        return Vec3(radius * std::cos(theta), radius * std::sin(theta) * std::cos(phi),
                    radius * std::sin(theta) * std::sin(phi));
    });
}

TriangleMesh makeBoxMesh(double sx, double sy, double sz) {
    TriangleMesh mesh;
    const double x = sx / 2, y = sy / 2, z = sz / 2;
    mesh.vertices = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                     {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
    appendQuad(mesh, 0, 3, 2, 1);  // bottom
    appendQuad(mesh, 4, 5, 6, 7);  // top
    appendQuad(mesh, 0, 1, 5, 4);  // front
    appendQuad(mesh, 2, 3, 7, 6);  // back
    appendQuad(mesh, 1, 2, 6, 5);  // right
    appendQuad(mesh, 3, 0, 4, 7);  // left
    return mesh;
}

TriangleMesh makeCylinderMesh(double radius, double height, int slices) {
    TriangleMesh mesh;
    const double h = height / 2;
    for (int j = 0; j < slices; ++j) {
        double phi = 2.0 * kPi * j / slices;
        mesh.vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi), -h);
        mesh.vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi), h);
    }
    int bottom_center = static_cast<int>(mesh.vertices.size());
    mesh.vertices.emplace_back(0, 0, -h);
    int top_center = bottom_center + 1;
    mesh.vertices.emplace_back(0, 0, h);
    for (int j = 0; j < slices; ++j) {
        int b0 = 2 * j, t0 = 2 * j + 1;
        int b1 = 2 * ((j + 1) % slices), t1 = 2 * ((j + 1) % slices) + 1;
        appendQuad(mesh, b0, b1, t1, t0);                    // wall
        mesh.triangles.push_back({bottom_center, b1, b0});   // bottom cap
        mesh.triangles.push_back({top_center, t0, t1});      // top cap
    }
    return mesh;
}

TriangleMesh resolveMesh(const std::string& spec) {
    if (spec.rfind("builtin:", 0) == 0) {
        std::string name = spec.substr(8);
        if (name == "mirror") return makeMirrorMesh();
        if (name == "sphere") return makeSphereMesh();
        if (name == "box") return makeBoxMesh();
        if (name == "cylinder") return makeCylinderMesh();
        throw std::invalid_argument("unknown builtin mesh '" + name + "'");
    }
    return loadMesh(spec);
}

void saveDefectSpec(const std::string& path, const DefectSpec& spec) {
    json j;
    j["schema"] = "linescan.defects/1";
    j["seed"] = spec.seed;
    json arr = json::array();
    for (const Defect& d : spec.defects)
        arr.push_back(json{{"point", {d.point.x(), d.point.y(), d.point.z()}},
                           {"radius", d.radius},
                           {"contrast", d.contrast}});
    j["defects"] = arr;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

DefectSpec loadDefectSpec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j = json::parse(in);
    if (j.at("schema") != "linescan.defects/1")
        throw std::runtime_error("unsupported defect schema in '" + path + "'");
    DefectSpec spec;
    spec.seed = j.value("seed", 0ull);
    for (const auto& e : j.at("defects")) {
        Defect d;
        d.point = Vec3(e.at("point").at(0), e.at("point").at(1), e.at("point").at(2));
        d.radius = e.at("radius");
        d.contrast = e.at("contrast");
        spec.defects.push_back(d);
    }
    return spec;
}

}  // namespace linescan
