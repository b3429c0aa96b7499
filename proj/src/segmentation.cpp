#include "linescan/segmentation.hpp"

#include "linescan/mesh_io.hpp"
#include "linescan/rng.hpp"

#include <algorithm>
#include <limits>

namespace linescan {

Vec3 averageNormal(const std::vector<Vec3>& normals) {
    if (normals.empty()) throw std::invalid_argument("averageNormal: empty set");
    Vec3 sum = Vec3::Zero();
    for (const Vec3& n : normals) sum += n;
    Vec3 mean = sum / static_cast<double>(normals.size());
    double len = mean.norm();
    if (len < 1e-12)
        throw std::runtime_error("averageNormal: degenerate region (normals cancel)");
    return mean / len;
}

double angleBetween(const Vec3& a, const Vec3& b) {
    double d = a.dot(b);
    return std::acos(std::clamp(d, -1.0, 1.0));
}

namespace {

struct ClusterState {
    std::vector<Vec3> centers;
    std::vector<std::vector<int>> members;  // indices into `valid`
    std::vector<double> min_dot;            // worst member dot per cluster
};

/// Assign each normal to the cluster with the smallest angle (largest dot).
/// Ties go to the lowest cluster index.
void assign(const std::vector<Vec3>& normals, ClusterState& st) {
    const int k = static_cast<int>(st.centers.size());
    for (auto& m : st.members) m.clear();
    for (std::size_t i = 0; i < normals.size(); ++i) {
        int best = 0;
        double best_dot = normals[i].dot(st.centers[0]);
        for (int j = 1; j < k; ++j) {
            double d = normals[i].dot(st.centers[j]);
            if (d > best_dot) {
                best_dot = d;
                best = j;
            }
        }
        st.members[best].push_back(static_cast<int>(i));
    }
}

void computeWorstDots(const std::vector<Vec3>& normals, ClusterState& st) {
    const int k = static_cast<int>(st.centers.size());
    st.min_dot.assign(k, 1.0);
    for (int j = 0; j < k; ++j)
        for (int i : st.members[j])
            st.min_dot[j] = std::min(st.min_dot[j], normals[i].dot(st.centers[j]));
}

/// Re-seed empty clusters from the farthest member of the worst cluster.
/// Returns true when anything changed (a reassignment pass is then needed).
bool reseedEmpty(const std::vector<Vec3>& normals, ClusterState& st) {
    const int k = static_cast<int>(st.centers.size());
    bool changed = false;
    for (int j = 0; j < k; ++j) {
        if (!st.members[j].empty()) continue;
        computeWorstDots(normals, st);
        int worst = -1;
        double worst_dot = 2.0;
        for (int w = 0; w < k; ++w) {
            if (st.members[w].empty()) continue;
            if (st.min_dot[w] < worst_dot) {
                worst_dot = st.min_dot[w];
                worst = w;
            }
        }
        if (worst < 0) break;
        int farthest = -1;
        double fdot = 2.0;
        for (int i : st.members[worst]) {
            double d = normals[i].dot(st.centers[worst]);
            if (d < fdot) {
                fdot = d;
                farthest = i;
            }
        }
        if (farthest < 0) break;
        st.centers[j] = normals[farthest];
        changed = true;
    }
    return changed;
}

}  // namespace

SegmentationResult kmeansSegment(const PointCloud& cloud, const SegmentationConfig& cfg) {
    if (!cloud.hasNormals())
        throw std::invalid_argument("kmeansSegment: cloud has no normals");
    if (!(cfg.gamma > 0.0) || cfg.gamma >= kPi / 2.0)
        throw std::invalid_argument("kmeansSegment: gamma out of (0, pi/2)");
    if (cfg.max_k < 1) throw std::invalid_argument("kmeansSegment: max_k must be >= 1");

    std::vector<int> valid;  // cloud indices with a usable normal
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (cloud.validNormal(i)) valid.push_back(static_cast<int>(i));
    if (valid.empty()) throw std::invalid_argument("kmeansSegment: no valid normals");

    std::vector<Vec3> normals;
    normals.reserve(valid.size());
    for (int i : valid) normals.push_back(cloud.normals[i]);

    const double cos_gamma = std::cos(cfg.gamma);
    Rng rng(cfg.seed);

    auto buildResult = [&](const ClusterState& st, int k) {
        SegmentationResult res;
        res.final_k = k;
        for (std::size_t j = 0; j < st.centers.size(); ++j) {
            if (st.members[j].empty()) continue;
            Region r;
            r.avg_normal = st.centers[j];
            r.max_angle = 0.0;
            for (int i : st.members[j]) {
                r.point_indices.push_back(valid[i]);
                r.max_angle = std::max(r.max_angle, angleBetween(normals[i], st.centers[j]));
            }
            res.regions.push_back(std::move(r));
        }
        return res;
    };

    SegmentationResult best;
    int best_sigma = -1;
    double best_worst_angle = std::numeric_limits<double>::infinity();
    std::vector<int> sigma_history;

    for (int k = std::max(1, cfg.initial_k); k <= cfg.max_k; ++k) {
        ClusterState st;
        st.centers.resize(k);
        st.members.resize(k);
        for (int j = 0; j < k; ++j) st.centers[j] = rng.unitVec3();

        int sigma_prev = -1;  // first iteration always runs
        for (int iter = 0; iter < cfg.max_inner_iters; ++iter) {
            assign(normals, st);
            for (int pass = 0; pass < k && reseedEmpty(normals, st); ++pass)
                assign(normals, st);

            // Update step: each center becomes the normalized member mean.
            for (int j = 0; j < k; ++j) {
                if (st.members[j].empty()) continue;
                Vec3 sum = Vec3::Zero();
                for (int i : st.members[j]) sum += normals[i];
                double len = sum.norm();
                if (len > 1e-12) st.centers[j] = sum / len;
                // A cancelling cluster keeps its previous center; it will not
                // converge and K grows past it.
            }

            computeWorstDots(normals, st);
            int sigma = 0;
            for (int j = 0; j < k; ++j)
                if (!st.members[j].empty() && st.min_dot[j] > cos_gamma) ++sigma;
            sigma_history.push_back(sigma);
            if (!(sigma > sigma_prev)) break;
            sigma_prev = sigma;
        }

        computeWorstDots(normals, st);
        int sigma = 0;
        bool all_converged = true;
        double worst_angle = 0.0;  // over all members, for best-so-far ranking
        for (int j = 0; j < k; ++j) {
            if (st.members[j].empty()) continue;
            if (st.min_dot[j] > cos_gamma)
                ++sigma;
            else
                all_converged = false;
            worst_angle =
                std::max(worst_angle, std::acos(std::clamp(st.min_dot[j], -1.0, 1.0)));
        }

        if (all_converged) {
            SegmentationResult res = buildResult(st, k);
            res.sigma_history = std::move(sigma_history);
            res.converged = true;
            return res;
        }
        if (sigma > best_sigma || (sigma == best_sigma && worst_angle < best_worst_angle)) {
            best = buildResult(st, k);
            best_sigma = sigma;
            best_worst_angle = worst_angle;
        }
    }

    best.sigma_history = std::move(sigma_history);
    best.converged = false;
    if (best.final_k == 0) best.final_k = cfg.max_k;
    return best;
}

void writeRegionPly(const std::string& path, const PointCloud& cloud,
                    const SegmentationResult& seg) {
    // Golden-ratio hue walk gives well-separated region colors.
    auto hsvToRgb = [](double h, double s, double v) {
        double r = 0, g = 0, b = 0;
        int i = static_cast<int>(h * 6.0) % 6;
        double f = h * 6.0 - std::floor(h * 6.0);
        double p = v * (1 - s), q = v * (1 - f * s), t = v * (1 - (1 - f) * s);
        switch (i) {
            case 0: r = v, g = t, b = p; break;
            case 1: r = q, g = v, b = p; break;
            case 2: r = p, g = v, b = t; break;
            case 3: r = p, g = q, b = v; break;
            case 4: r = t, g = p, b = v; break;
            default: r = v, g = p, b = q; break;
        }
        return Rgb{static_cast<std::uint8_t>(r * 255), static_cast<std::uint8_t>(g * 255),
                   static_cast<std::uint8_t>(b * 255)};
    };

    std::vector<Rgb> colors(cloud.size(), Rgb{80, 80, 80});
    double hue = 0.0;
    for (const Region& region : seg.regions) {
        Rgb c = hsvToRgb(hue, 0.85, 0.95);
        hue = std::fmod(hue + 0.61803398875, 1.0);
        for (int i : region.point_indices) colors[i] = c;
    }
    writePointCloudPly(path, cloud, colors);
}

}  // namespace linescan
