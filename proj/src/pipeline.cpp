#include "linescan/pipeline.hpp"

#include "linescan/mesh_io.hpp"
#include "linescan/rng.hpp"
#include "linescan/scan_control.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace linescan {

namespace fs = std::filesystem;
using nlohmann::json;

RigidTransform SceneConfig::truePose() const {
    // In-plane pose: rotate about the plane normal, translate along the
    // plane's own axes.
    Vec3 seed = std::abs(plane.normal.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    Vec3 u = (seed - plane.normal * seed.dot(plane.normal)).normalized();
    Vec3 v = plane.normal.cross(u);
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(degToRad(yaw_deg), plane.normal).toRotationMatrix();
    t.translation = tx * u + ty * v;
    return t;
}

PipelineConfig defaultConfig() { return PipelineConfig{}; }

namespace {

json configToJson(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["mesh"] = c.mesh;
    j["out_dir"] = c.out_dir;
    j["sampling"] = {{"n_points", c.sample_points}};
    j["ray_fan"] = {{"theta_steps", c.ray_fan.theta_steps},
                    {"phi_steps", c.ray_fan.phi_steps},
                    {"radius", c.ray_fan.radius},
                    {"angular_tolerance", c.ray_fan.angular_tolerance}};
    j["normals_k"] = c.normals_k;
    j["boundary"] = {{"k", c.boundary.k},
                     {"gap_threshold", c.boundary.gap_threshold},
                     {"rim_margin_frac", c.boundary.rim_margin_frac}};
    j["segmentation"] = {{"gamma_deg", radToDeg(c.segmentation.gamma)},
                         {"initial_k", c.segmentation.initial_k},
                         {"max_k", c.segmentation.max_k},
                         {"max_inner_iters", c.segmentation.max_inner_iters}};
    j["camera"] = {{"field_of_view", c.camera.field_of_view},
                   {"depth_of_view", c.camera.depth_of_view},
                   {"working_distance", c.camera.working_distance},
                   {"beta_deg", radToDeg(c.camera.beta)},
                   {"n_pixels", c.camera.n_pixels},
                   {"pixel_size", c.camera.pixel_size},
                   {"angle_of_view_deg", radToDeg(c.camera.angle_of_view)},
                   {"sensor_diagonal", c.camera.sensor_diagonal},
                   {"f_number", c.camera.f_number},
                   {"focal_length", c.camera.focal_length},
                   {"scan_speed", c.camera.scan_speed}};
    j["icp"] = {{"max_iterations", c.icp.max_iterations},
                {"convergence_tol", c.icp.convergence_tol},
                {"max_correspondence_dist", c.icp.max_correspondence_dist}};
    j["detect"] = {{"gaussian_sigma", c.detect.gaussian_sigma},
                   {"kernel_size", c.detect.kernel_size},
                   {"canny_low", c.detect.canny_low},
                   {"canny_high", c.detect.canny_high},
                   {"area_threshold", c.detect.area_threshold},
                   {"iou_threshold", c.detect.iou_threshold}};
    j["scene"] = {{"plane", {c.scene.plane.normal.x(), c.scene.plane.normal.y(),
                             c.scene.plane.normal.z(), c.scene.plane.d}},
                  {"yaw_deg", c.scene.yaw_deg},
                  {"tx", c.scene.tx},
                  {"ty", c.scene.ty},
                  {"grid_spacing", c.scene.grid_spacing},
                  {"grid_margin", c.scene.grid_margin},
                  {"depth_noise_sigma", c.scene.depth_noise_sigma}};
    json defects;
    defects["count"] = c.defects.count;
    defects["radius"] = c.defects.radius;
    defects["contrast"] = c.defects.contrast;
    json pts = json::array();
    for (const Defect& d : c.defects.explicit_defects)
        pts.push_back(json{{"point", {d.point.x(), d.point.y(), d.point.z()}},
                           {"radius", d.radius},
                           {"contrast", d.contrast}});
    defects["points"] = pts;
    j["defects"] = defects;
    return j;
}

PipelineConfig configFromJson(const json& j) {
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    c.mesh = j.value("mesh", c.mesh);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("sampling")) c.sample_points = j["sampling"].value("n_points", c.sample_points);
    if (j.contains("ray_fan")) {
        const auto& r = j["ray_fan"];
        c.ray_fan.theta_steps = r.value("theta_steps", c.ray_fan.theta_steps);
        c.ray_fan.phi_steps = r.value("phi_steps", c.ray_fan.phi_steps);
        c.ray_fan.radius = r.value("radius", c.ray_fan.radius);
        c.ray_fan.angular_tolerance = r.value("angular_tolerance", c.ray_fan.angular_tolerance);
    }
    c.normals_k = j.value("normals_k", c.normals_k);
    if (j.contains("boundary")) {
        const auto& b = j["boundary"];
        c.boundary.k = b.value("k", c.boundary.k);
        c.boundary.gap_threshold = b.value("gap_threshold", c.boundary.gap_threshold);
        c.boundary.rim_margin_frac = b.value("rim_margin_frac", c.boundary.rim_margin_frac);
    }
    if (j.contains("segmentation")) {
        const auto& s = j["segmentation"];
        c.segmentation.gamma = degToRad(s.value("gamma_deg", radToDeg(c.segmentation.gamma)));
        c.segmentation.initial_k = s.value("initial_k", c.segmentation.initial_k);
        c.segmentation.max_k = s.value("max_k", c.segmentation.max_k);
        c.segmentation.max_inner_iters =
            s.value("max_inner_iters", c.segmentation.max_inner_iters);
    }
    if (j.contains("camera")) {
        const auto& cam = j["camera"];
        c.camera.field_of_view = cam.value("field_of_view", c.camera.field_of_view);
        c.camera.depth_of_view = cam.value("depth_of_view", c.camera.depth_of_view);
        c.camera.working_distance = cam.value("working_distance", c.camera.working_distance);
        c.camera.beta = degToRad(cam.value("beta_deg", radToDeg(c.camera.beta)));
        c.camera.n_pixels = cam.value("n_pixels", c.camera.n_pixels);
        c.camera.pixel_size = cam.value("pixel_size", c.camera.pixel_size);
        c.camera.angle_of_view =
            degToRad(cam.value("angle_of_view_deg", radToDeg(c.camera.angle_of_view)));
        c.camera.sensor_diagonal = cam.value("sensor_diagonal", c.camera.sensor_diagonal);
        c.camera.f_number = cam.value("f_number", c.camera.f_number);
        c.camera.focal_length = cam.value("focal_length", c.camera.focal_length);
        c.camera.scan_speed = cam.value("scan_speed", c.camera.scan_speed);
    }
    if (j.contains("icp")) {
        const auto& i = j["icp"];
        c.icp.max_iterations = i.value("max_iterations", c.icp.max_iterations);
        c.icp.convergence_tol = i.value("convergence_tol", c.icp.convergence_tol);
        c.icp.max_correspondence_dist =
            i.value("max_correspondence_dist", c.icp.max_correspondence_dist);
    }
    if (j.contains("detect")) {
        const auto& d = j["detect"];
        c.detect.gaussian_sigma = d.value("gaussian_sigma", c.detect.gaussian_sigma);
        c.detect.kernel_size = d.value("kernel_size", c.detect.kernel_size);
        c.detect.canny_low = d.value("canny_low", c.detect.canny_low);
        c.detect.canny_high = d.value("canny_high", c.detect.canny_high);
        c.detect.area_threshold = d.value("area_threshold", c.detect.area_threshold);
        c.detect.iou_threshold = d.value("iou_threshold", c.detect.iou_threshold);
    }
    if (j.contains("scene")) {
        const auto& s = j["scene"];
        if (s.contains("plane")) {
            const auto& p = s["plane"];
            c.scene.plane = Plane::fromCoefficients(p.at(0), p.at(1), p.at(2), p.at(3));
        }
        c.scene.yaw_deg = s.value("yaw_deg", c.scene.yaw_deg);
        c.scene.tx = s.value("tx", c.scene.tx);
        c.scene.ty = s.value("ty", c.scene.ty);
        c.scene.grid_spacing = s.value("grid_spacing", c.scene.grid_spacing);
        c.scene.grid_margin = s.value("grid_margin", c.scene.grid_margin);
        c.scene.depth_noise_sigma = s.value("depth_noise_sigma", c.scene.depth_noise_sigma);
    }
    if (j.contains("defects")) {
        const auto& d = j["defects"];
        c.defects.count = d.value("count", c.defects.count);
        c.defects.radius = d.value("radius", c.defects.radius);
        c.defects.contrast = d.value("contrast", c.defects.contrast);
        if (d.contains("points"))
            for (const auto& e : d["points"]) {
                Defect def;
                def.point =
                    Vec3(e.at("point").at(0), e.at("point").at(1), e.at("point").at(2));
                def.radius = e.value("radius", c.defects.radius);
                def.contrast = e.value("contrast", c.defects.contrast);
                c.defects.explicit_defects.push_back(def);
            }
    }
    return c;
}

}  // namespace

PipelineConfig loadConfigFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    return configFromJson(json::parse(in));
}

PipelineConfig configFromJsonText(const std::string& text) {
    return configFromJson(json::parse(text));
}

std::string configToJsonText(const PipelineConfig& cfg) {
    return configToJson(cfg).dump(2) + "\n";
}

std::uint64_t configHash(const PipelineConfig& cfg) {
    std::string text = configToJsonText(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

CameraSpec effectiveCamera(const PipelineConfig& cfg) {
    CameraSpec cam = cfg.camera;
    if (cam.field_of_view <= 0.0)
        cam.field_of_view = fieldOfView(cam.working_distance, cam.angle_of_view);
    if (cam.depth_of_view <= 0.0)
        cam.depth_of_view = depthOfView(cam.working_distance, cam.f_number,
                                        cam.sensor_diagonal, cam.focal_length);
    return cam;
}

std::string artifact(const PipelineConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void ensureOutDir(const PipelineConfig& cfg) { fs::create_directories(cfg.out_dir); }

}  // namespace

void saveSegmentation(const std::string& path, const SegmentationResult& seg) {
    json j;
    j["schema"] = "linescan.regions/1";
    j["final_k"] = seg.final_k;
    j["converged"] = seg.converged;
    j["sigma_history"] = seg.sigma_history;
    json regions = json::array();
    for (const Region& r : seg.regions)
        regions.push_back(
            json{{"avg_normal", {r.avg_normal.x(), r.avg_normal.y(), r.avg_normal.z()}},
                 {"max_angle", r.max_angle},
                 {"points", r.point_indices}});
    j["regions"] = regions;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump() << "\n";
}

SegmentationResult loadSegmentation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j = json::parse(in);
    if (j.at("schema") != "linescan.regions/1")
        throw std::runtime_error("unsupported regions schema in '" + path + "'");
    SegmentationResult seg;
    seg.final_k = j.at("final_k");
    seg.converged = j.at("converged");
    seg.sigma_history = j.at("sigma_history").get<std::vector<int>>();
    for (const auto& r : j.at("regions")) {
        Region region;
        region.avg_normal =
            Vec3(r.at("avg_normal").at(0), r.at("avg_normal").at(1), r.at("avg_normal").at(2));
        region.max_angle = r.at("max_angle");
        region.point_indices = r.at("points").get<std::vector<int>>();
        seg.regions.push_back(std::move(region));
    }
    return seg;
}

double rotationErrorDeg(const RigidTransform& a, const RigidTransform& b) {
    Mat3 rel = a.rotation.transpose() * b.rotation;
    return radToDeg(rotationToAxisAngle(rel).norm());
}

double translationError(const RigidTransform& a, const RigidTransform& b) {
    return (a.translation - b.translation).norm();
}

SampleOutputs runSample(const PipelineConfig& cfg) {
    ensureOutDir(cfg);
    TriangleMesh mesh = resolveMesh(cfg.mesh);
    SampleOutputs out;
    out.sampled = sampleMesh(mesh, cfg.sample_points, Rng::deriveSeed(cfg.seed, "sample"));
    PointCloud exterior_raw = filterExterior(out.sampled, cfg.ray_fan);
    out.exterior = estimateNormals(exterior_raw, cfg.normals_k);
    writePointCloudPly(artifact(cfg, "sampled.ply"), out.sampled);
    writePointCloudPly(artifact(cfg, "exterior.ply"), out.exterior);
    return out;
}

SegmentationResult runSegment(const PipelineConfig& cfg) {
    PointCloud exterior = loadPointCloudPly(artifact(cfg, "exterior.ply"));
    SegmentationConfig scfg = cfg.segmentation;
    scfg.seed = Rng::deriveSeed(cfg.seed, "segment");
    SegmentationResult seg = kmeansSegment(exterior, scfg);
    saveSegmentation(artifact(cfg, "regions.json"), seg);
    writeRegionPly(artifact(cfg, "regions_colored.ply"), exterior, seg);
    if (!seg.converged)
        throw std::runtime_error("segmentation did not converge within max_k regions");
    return seg;
}

PlanOutputs runPlan(const PipelineConfig& cfg) {
    PointCloud exterior = loadPointCloudPly(artifact(cfg, "exterior.ply"));
    SegmentationResult seg = loadSegmentation(artifact(cfg, "regions.json"));
    CameraSpec cam = effectiveCamera(cfg);
    PlanOutputs out;
    out.path = planScanPath(exterior, seg, cam, &out.plans);
    saveScanPath(artifact(cfg, "scanpath.json"), out.path, cam);
    return out;
}

RegistrationResult runRegister(const PipelineConfig& cfg) {
    PointCloud exterior = loadPointCloudPly(artifact(cfg, "exterior.ply"));
    SceneSpec scene;
    scene.object = resolveMesh(cfg.mesh);
    scene.true_pose = cfg.scene.truePose();
    scene.plane = cfg.scene.plane;
    scene.grid_spacing = cfg.scene.grid_spacing;
    scene.grid_margin = cfg.scene.grid_margin;
    scene.depth_noise_sigma = cfg.scene.depth_noise_sigma;
    scene.seed = Rng::deriveSeed(cfg.seed, "capture");
    PointCloud capture = synthDepthCapture(scene);
    writePointCloudPly(artifact(cfg, "capture.ply"), capture);

    RegistrationResult result = registerObject(exterior, capture, cfg.scene.plane,
                                               RigidTransform::identity(), cfg.icp,
                                               cfg.boundary);
    saveRegistrationReport(artifact(cfg, "registration.json"), result);
    return result;
}

ScanSimOutputs runScanSim(const PipelineConfig& cfg) {
    CameraSpec cam;
    ScanPath path = loadScanPath(artifact(cfg, "scanpath.json"), &cam);
    RegistrationResult reg = loadRegistrationReport(artifact(cfg, "registration.json"));
    PointCloud exterior = loadPointCloudPly(artifact(cfg, "exterior.ply"));

    ScanSimOutputs out;
    if (!cfg.defects.explicit_defects.empty()) {
        out.defects.defects = cfg.defects.explicit_defects;
        out.defects.seed = Rng::deriveSeed(cfg.seed, "defects");
    } else {
        SegmentationResult seg = loadSegmentation(artifact(cfg, "regions.json"));
        std::vector<RegionPlan> plans;
        planScanPath(exterior, seg, cam, &plans);
        out.defects = placeDefects(plans, cam, cfg.defects.count, cfg.defects.radius,
                                   cfg.defects.contrast, Rng::deriveSeed(cfg.seed, "defects"));
    }
    saveDefectSpec(artifact(cfg, "defects.json"), out.defects);

    out.robot_path = pathToRobotFrame(path, reg.transform);
    saveRobotPath(artifact(cfg, "robotpath.json"), out.robot_path);

    // Imaging happens relative to the true object pose; the recovered pose
    // steers the camera, so any registration error shifts the images.
    RigidTransform pose_error = cfg.scene.truePose().inverse() * reg.transform;
    out.sim = simulateLineScan(out.defects, path, cam, exterior, &pose_error);

    fs::create_directories(artifact(cfg, "images"));
    char name[64];
    json truth;
    truth["schema"] = "linescan.truth/1";
    json truth_images = json::array();
    for (std::size_t i = 0; i < out.sim.images.size(); ++i) {
        std::snprintf(name, sizeof name, "images/patch_%05zu.pgm", i);
        writePgm(artifact(cfg, name), out.sim.images[i]);
        json boxes = json::array();
        for (std::size_t d = 0; d < out.defects.defects.size(); ++d) {
            DefectFootprint fp =
                defectFootprint(out.defects.defects[d], path.points[2 * i],
                                path.points[2 * i + 1], cam, &pose_error);
            if (fp.pixels == 0) continue;
            boxes.push_back(json{{"x0", fp.box.x0},
                                 {"y0", fp.box.y0},
                                 {"x1", fp.box.x1},
                                 {"y1", fp.box.y1},
                                 {"pixels", fp.pixels},
                                 {"defect", d}});
        }
        truth_images.push_back(json{{"index", i}, {"boxes", boxes}});
    }
    json truth_defects = json::array();
    for (const Defect& d : out.defects.defects)
        truth_defects.push_back(json{{"point", {d.point.x(), d.point.y(), d.point.z()}},
                                     {"radius", d.radius}});
    truth["images"] = truth_images;
    truth["defects"] = truth_defects;
    {
        std::ofstream tf(artifact(cfg, "truth.json"));
        tf << truth.dump(2) << "\n";
    }

    json cov;
    cov["schema"] = "linescan.coverage/1";
    cov["coverage"] = out.sim.coverage;
    cov["exterior_points"] = exterior.size();
    cov["patches"] = out.sim.images.size();
    {
        std::ofstream cf(artifact(cfg, "coverage.json"));
        cf << cov.dump(2) << "\n";
    }
    return out;
}

namespace {

std::vector<std::string> listImages(const PipelineConfig& cfg) {
    std::vector<std::string> files;
    fs::path dir = fs::path(cfg.out_dir) / "images";
    if (!fs::exists(dir)) throw std::runtime_error("missing images directory " + dir.string());
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".pgm") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

DetectOutputs runDetect(const PipelineConfig& cfg) {
    auto files = listImages(cfg);
    DetectOutputs out;

    fs::create_directories(artifact(cfg, "annotated"));
    json det;
    det["schema"] = "linescan.detections/1";
    json det_images = json::array();
    for (std::size_t i = 0; i < files.size(); ++i) {
        GrayImage img = readPgm(files[i]);
        auto defects = detectDefectsInImage(img, cfg.detect);
        out.per_image.push_back(defects);

        json boxes = json::array();
        std::vector<PixelBox> raw_boxes;
        for (const DefectBox& d : defects) {
            raw_boxes.push_back(d.box);
            boxes.push_back(json{{"x0", d.box.x0},
                                 {"y0", d.box.y0},
                                 {"x1", d.box.x1},
                                 {"y1", d.box.y1},
                                 {"area", d.area},
                                 {"cx", d.centroid_x},
                                 {"cy", d.centroid_y}});
        }
        det_images.push_back(
            json{{"index", i}, {"file", fs::path(files[i]).filename().string()}, {"boxes", boxes}});
        char name[64];
        std::snprintf(name, sizeof name, "annotated/patch_%05zu.ppm", i);
        writePpmAnnotated(artifact(cfg, name), img, raw_boxes);
    }
    det["images"] = det_images;
    {
        std::ofstream df(artifact(cfg, "detections.json"));
        df << det.dump(2) << "\n";
    }

    // Score against the simulator's ground truth when it exists.
    fs::path truth_path = fs::path(cfg.out_dir) / "truth.json";
    if (fs::exists(truth_path)) {
        std::ifstream tf(truth_path);
        json truth = json::parse(tf);
        std::vector<MetricsRow> rows;
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < files.size(); ++i) {
            std::vector<PixelBox> truth_boxes;
            if (i < truth.at("images").size())
                for (const auto& b : truth.at("images").at(i).at("boxes"))
                    truth_boxes.push_back(
                        PixelBox{b.at("x0"), b.at("y0"), b.at("x1"), b.at("y1")});
            std::vector<PixelBox> det_boxes;
            for (const DefectBox& d : out.per_image[i]) det_boxes.push_back(d.box);
            DetectionMetrics m =
                scoreDetections(det_boxes, truth_boxes, cfg.detect.iou_threshold);
            tp += m.tp;
            fp += m.fp;
            fn += m.fn;
            char part[32];
            std::snprintf(part, sizeof part, "patch_%05zu", i);
            rows.push_back(MetricsRow{part, m});
        }
        out.overall = metricsFromCounts(tp, fp, fn);
        out.scored = true;
        rows.push_back(MetricsRow{"overall", out.overall});
        writeMetricsCsv(artifact(cfg, "metrics.csv"), rows);
    }
    return out;
}

MapOutputs runMap(const PipelineConfig& cfg) {
    CameraSpec cam;
    loadScanPath(artifact(cfg, "scanpath.json"), &cam);
    auto robot_path = loadRobotPath(artifact(cfg, "robotpath.json"));
    RegistrationResult reg = loadRegistrationReport(artifact(cfg, "registration.json"));

    std::ifstream df(artifact(cfg, "detections.json"));
    if (!df) throw std::runtime_error("missing detections.json");
    json det = json::parse(df);

    MapOutputs out;
    PointCloud world_cloud;
    json map_json;
    map_json["schema"] = "linescan.defectmap/1";
    json entries = json::array();

    bool have_truth = fs::exists(fs::path(cfg.out_dir) / "truth.json");
    json truth;
    if (have_truth) {
        std::ifstream tf(fs::path(cfg.out_dir) / "truth.json");
        truth = json::parse(tf);
    }

    for (const auto& img_entry : det.at("images")) {
        std::size_t index = img_entry.at("index");
        if (index >= robot_path.size())
            throw std::runtime_error("detections refer to an image without a robot pose");
        const RobotPose& anchor = robot_path[index].first;

        std::vector<PixelBox> det_boxes;
        std::vector<DefectLocation> locs;
        for (const auto& b : img_entry.at("boxes")) {
            // Image rows stack along the motion direction: i_x is the row
            // centroid, i_y the column centroid, y_max the sensor width.
            DefectLocation loc = mapPixelTo3d(b.at("cy"), b.at("cx"), cam.pixel_size,
                                              cam.working_distance, cam.n_pixels, anchor,
                                              reg.transform);
            det_boxes.push_back(PixelBox{b.at("x0"), b.at("y0"), b.at("x1"), b.at("y1")});
            locs.push_back(loc);
        }

        std::vector<int> truth_defect_ids;
        std::vector<PixelBox> truth_boxes;
        if (have_truth && index < truth.at("images").size()) {
            for (const auto& b : truth.at("images").at(index).at("boxes")) {
                truth_boxes.push_back(PixelBox{b.at("x0"), b.at("y0"), b.at("x1"), b.at("y1")});
                truth_defect_ids.push_back(b.at("defect"));
            }
        }
        std::vector<std::pair<int, int>> matches;
        if (!truth_boxes.empty())
            scoreDetections(det_boxes, truth_boxes, cfg.detect.iou_threshold, &matches);

        for (std::size_t d = 0; d < locs.size(); ++d) {
            const DefectLocation& loc = locs[d];
            world_cloud.points.push_back(loc.world);
            json e{{"image", index},
                   {"pixel", {loc.pixel_x, loc.pixel_y}},
                   {"local", {loc.local.x(), loc.local.y(), loc.local.z()}},
                   {"world", {loc.world.x(), loc.world.y(), loc.world.z()}},
                   {"object", {loc.object.x(), loc.object.y(), loc.object.z()}}};
            for (const auto& [di, ti] : matches)
                if (di == static_cast<int>(d)) {
                    int defect_id = truth_defect_ids[ti];
                    const auto& p = truth.at("defects").at(defect_id).at("point");
                    Vec3 gt(p.at(0), p.at(1), p.at(2));
                    double err = (loc.object - gt).norm();
                    e["truth_defect"] = defect_id;
                    e["object_error"] = err;
                    out.max_object_error = std::max(out.max_object_error, err);
                    ++out.matched;
                }
            entries.push_back(std::move(e));
            out.locations.push_back(loc);
        }
    }
    map_json["defects"] = entries;
    {
        std::ofstream mf(artifact(cfg, "defect_map.json"));
        mf << map_json.dump(2) << "\n";
    }
    if (!world_cloud.empty())
        writePointCloudPly(artifact(cfg, "defect_map.ply"), world_cloud);
    return out;
}

E2eSummary runE2e(const PipelineConfig& cfg) {
    ensureOutDir(cfg);

    E2eSummary s;
    SampleOutputs sample = runSample(cfg);
    s.exterior_points = static_cast<int>(sample.exterior.size());

    SegmentationResult seg = runSegment(cfg);
    s.region_count = static_cast<int>(seg.regions.size());
    s.segmentation_converged = seg.converged;

    PlanOutputs plan = runPlan(cfg);
    s.patch_count = static_cast<int>(plan.path.points.size() / 2);

    RegistrationResult reg = runRegister(cfg);
    RigidTransform true_pose = cfg.scene.truePose();
    s.registration_rot_err_deg = rotationErrorDeg(true_pose, reg.transform);
    s.registration_trans_err = translationError(true_pose, reg.transform);
    s.c2c_mean = reg.c2c_mean;
    s.c2c_std = reg.c2c_std;

    ScanSimOutputs sim = runScanSim(cfg);
    s.coverage = sim.sim.coverage;
    s.defect_count = static_cast<int>(sim.defects.defects.size());

    DetectOutputs det = runDetect(cfg);
    s.detection = det.overall;

    MapOutputs map = runMap(cfg);
    s.max_map_error = map.max_object_error;

    json manifest;
    manifest["schema"] = "linescan.manifest/1";
    manifest["tool"] = "linescan 1.0.0";
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = configHash(cfg);
    manifest["config"] = json::parse(configToJsonText(cfg));
    manifest["artifacts"] = {"sampled.ply",    "exterior.ply",     "regions.json",
                             "regions_colored.ply", "scanpath.json", "capture.ply",
                             "registration.json",   "defects.json",  "robotpath.json",
                             "images/",        "truth.json",       "coverage.json",
                             "detections.json", "annotated/",      "metrics.csv",
                             "defect_map.json", "defect_map.ply"};
    std::ofstream mf(artifact(cfg, "manifest.json"));
    mf << manifest.dump(2) << "\n";
    return s;
}

}  // namespace linescan
