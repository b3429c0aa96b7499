#include "linescan/registration.hpp"

#include "linescan/cloud_ops.hpp"
#include "linescan/kdtree.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>

namespace linescan {

using nlohmann::json;

PointCloud projectToPlane(const PointCloud& cloud, const Plane& plane) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        double t = plane.signedDistance(p);
        out.points.push_back(p - t * plane.normal);
    }
    return out;
}

RigidTransform composeHandEye(const RigidTransform& bTe, const RigidTransform& eTm,
                              const RigidTransform& mTc) {
    return bTe * eTm * mTc;
}

namespace {

/// Closed-form rigid least squares: R,t minimizing sum |R*s + t - d|^2.
RigidTransform solveRigidLeastSquares(const std::vector<Vec3>& src,
                                      const std::vector<Vec3>& dst) {
    const double n = static_cast<double>(src.size());
    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= n;
    cd /= n;
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i)
        h += (src[i] - cs) * (dst[i] - cd).transpose();
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Mat3 r = v * u.transpose();
    if (r.determinant() < 0.0) {
        v.col(2) *= -1.0;
        r = v * u.transpose();
    }
    return RigidTransform{r, cd - r * cs};
}

bool isDegenerateCloud(const PointCloud& cloud) {
    // Collinear check through the second moment: rank < 2 means all points
    // sit on one line.
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : cloud.points) mean += p;
    mean /= static_cast<double>(cloud.size());
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : cloud.points) {
        Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 evals = eig.eigenvalues();
    return evals[2] <= 1e-18 || evals[1] <= 1e-12 * evals[2];
}

}  // namespace

RegistrationResult icpAlign(const PointCloud& source, const PointCloud& target,
                            const IcpConfig& cfg, const RigidTransform* initial) {
    if (source.size() < 3 || target.size() < 3)
        throw std::invalid_argument("icpAlign: clouds need at least 3 points");
    if (isDegenerateCloud(target)) throw std::invalid_argument("icpAlign: collinear target");

    double max_dist = cfg.max_correspondence_dist;
    if (max_dist <= 0.0) max_dist = 0.10 * bboxDiagonal(target.points);
    const double max_d2 = max_dist * max_dist;

    KdTree3 tree(target.points);

    auto mean = [](const std::vector<Vec3>& pts) {
        Vec3 m = Vec3::Zero();
        for (const Vec3& p : pts) m += p;
        return Vec3(m / static_cast<double>(pts.size()));
    };
    RigidTransform t;
    if (initial)
        t = *initial;
    else
        t.translation = mean(target.points) - mean(source.points);

    RegistrationResult result;
    double rms_prev = std::numeric_limits<double>::infinity();

    std::vector<Vec3> matched_src, matched_dst;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        matched_src.clear();
        matched_dst.clear();
        for (const Vec3& s : source.points) {
            Vec3 moved = t.applyPoint(s);
            double d2 = 0.0;
            int j = tree.nearest(moved, &d2);
            if (j >= 0 && d2 <= max_d2) {
                matched_src.push_back(s);
                matched_dst.push_back(target.points[j]);
            }
        }
        if (matched_src.size() < 3)
            throw std::runtime_error("icpAlign: fewer than 3 correspondences");

        t = solveRigidLeastSquares(matched_src, matched_dst);

        double se = 0.0;
        for (std::size_t i = 0; i < matched_src.size(); ++i)
            se += (t.applyPoint(matched_src[i]) - matched_dst[i]).squaredNorm();
        double rms = std::sqrt(se / static_cast<double>(matched_src.size()));
        result.rms_history.push_back(rms);
        result.iterations = iter;
        result.rms_error = rms;
        if (std::abs(rms_prev - rms) < cfg.convergence_tol) {
            result.converged = true;
            break;
        }
        rms_prev = rms;
    }
    result.transform = t;
    return result;
}

std::pair<double, double> cloudToCloudError(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("cloudToCloudError: empty cloud");
    KdTree3 tree(b.points);
    std::vector<double> dists;
    dists.reserve(a.size());
    for (const Vec3& p : a.points) {
        double d2 = 0.0;
        tree.nearest(p, &d2);
        dists.push_back(std::sqrt(d2));
    }
    double mean = 0.0;
    for (double d : dists) mean += d;
    mean /= static_cast<double>(dists.size());
    double var = 0.0;
    for (double d : dists) var += (d - mean) * (d - mean);
    var /= static_cast<double>(dists.size());
    return {mean, std::sqrt(var)};
}

PointCloud captureHoleRim(const PointCloud& capture, const Plane& plane,
                          const BoundaryConfig& bcfg) {
    auto boundary = boundaryIndices(capture, bcfg.k, bcfg.gap_threshold);

    // In-plane coordinates of the capture; the rim is whatever boundary lies
    // clear of the rectangular capture border.
    Vec3 seed = std::abs(plane.normal.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    Vec3 u = (seed - plane.normal * seed.dot(plane.normal)).normalized();
    Vec3 v = plane.normal.cross(u);

    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
    double v_lo = u_lo, v_hi = -u_lo;
    for (const Vec3& p : capture.points) {
        double pu = p.dot(u), pv = p.dot(v);
        u_lo = std::min(u_lo, pu);
        u_hi = std::max(u_hi, pu);
        v_lo = std::min(v_lo, pv);
        v_hi = std::max(v_hi, pv);
    }
    double margin = bcfg.rim_margin_frac * std::max(u_hi - u_lo, v_hi - v_lo);

    PointCloud rim;
    for (int i : boundary) {
        const Vec3& p = capture.points[i];
        double pu = p.dot(u), pv = p.dot(v);
        if (pu > u_lo + margin && pu < u_hi - margin && pv > v_lo + margin &&
            pv < v_hi - margin)
            rim.points.push_back(p);
    }
    return rim;
}

RegistrationResult registerObject(const PointCloud& model_cloud, const PointCloud& capture,
                                  const Plane& plane, const RigidTransform& bTd,
                                  const IcpConfig& cfg, const BoundaryConfig& bcfg) {
    PointCloud h_proj = projectToPlane(model_cloud, plane);
    PointCloud h_bd = extractBoundary(h_proj, bcfg.k, bcfg.gap_threshold);
    if (h_bd.size() < 3)
        throw std::runtime_error("registerObject: model projection boundary too small");

    PointCloud g_bd = captureHoleRim(capture, plane, bcfg);
    if (g_bd.size() < 3)
        throw std::runtime_error("registerObject: no occlusion hole found in capture");

    // Initialization. Point-to-point ICP on a smooth convex rim observes
    // rotation weakly: tangential sliding barely changes the residual, and
    // the quantized rim leaves local minima about a degree apart, so the
    // start must already be in the right basin. A coarse-to-fine scan of the
    // in-plane rotation against the true nearest-neighbor cost finds that
    // basin globally; it also fixes the yaw deterministically when the
    // outline is nearly rotation symmetric.
    Vec3 ch = Vec3::Zero(), cg = Vec3::Zero();
    for (const Vec3& p : h_bd.points) ch += p;
    ch /= static_cast<double>(h_bd.size());
    for (const Vec3& p : g_bd.points) cg += p;
    cg /= static_cast<double>(g_bd.size());

    KdTree3 rim_tree(g_bd.points);
    auto yawTransform = [&](double yaw) {
        RigidTransform t;
        t.rotation = Eigen::AngleAxisd(yaw, plane.normal).toRotationMatrix();
        t.translation = cg - t.rotation * ch;
        return t;
    };
    auto yawCost = [&](double yaw) {
        RigidTransform t = yawTransform(yaw);
        double sum = 0.0;
        for (const Vec3& p : h_bd.points) {
            double d2 = 0.0;
            rim_tree.nearest(t.applyPoint(p), &d2);
            sum += d2;
        }
        return sum;
    };
    double best_yaw = 0.0, best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 720; ++k) {  // full circle, half-degree steps
        double yaw = -kPi + 2.0 * kPi * k / 720.0;
        double cost = yawCost(yaw);
        if (cost < best_cost) {
            best_cost = cost;
            best_yaw = yaw;
        }
    }
    for (int k = -12; k <= 12; ++k) {  // refine +-0.6 deg in 0.05 deg steps
        double yaw = best_yaw + degToRad(0.05) * k;
        double cost = yawCost(yaw);
        if (cost < best_cost) {
            best_cost = cost;
            best_yaw = yaw;
        }
    }
    RigidTransform init = yawTransform(best_yaw);

    RegistrationResult result = icpAlign(h_bd, g_bd, cfg, &init);
    PointCloud aligned = applyTransform(h_bd, result.transform);
    auto [mean, stddev] = cloudToCloudError(aligned, g_bd);
    result.c2c_mean = mean;
    result.c2c_std = stddev;
    result.transform = bTd * result.transform;
    return result;
}

void saveRegistrationReport(const std::string& path, const RegistrationResult& result) {
    json j;
    j["schema"] = "linescan.registration/1";
    std::vector<double> rt;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) rt.push_back(result.transform.rotation(r, c));
        rt.push_back(result.transform.translation[r]);
    }
    j["transform"] = rt;  // 12 numbers, row-major [R | t]
    j["rms"] = result.rms_error;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["rms_history"] = result.rms_history;
    j["c2c_mean"] = result.c2c_mean;
    j["c2c_std"] = result.c2c_std;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

RegistrationResult loadRegistrationReport(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j = json::parse(in);
    if (j.at("schema") != "linescan.registration/1")
        throw std::runtime_error("unsupported registration schema in '" + path + "'");
    RegistrationResult result;
    auto rt = j.at("transform").get<std::vector<double>>();
    if (rt.size() != 12) throw std::runtime_error("registration transform needs 12 numbers");
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) result.transform.rotation(r, c) = rt[r * 4 + c];
        result.transform.translation[r] = rt[r * 4 + 3];
    }
    result.rms_error = j.at("rms");
    result.iterations = j.at("iterations");
    result.converged = j.value("converged", false);
    if (j.contains("rms_history"))
        result.rms_history = j.at("rms_history").get<std::vector<double>>();
    result.c2c_mean = j.at("c2c_mean");
    result.c2c_std = j.at("c2c_std");
    return result;
}

}  // namespace linescan
