#include "linescan/inspection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace linescan {

namespace {

void checkConfig(const DetectConfig& cfg) {
    if (cfg.kernel_size < 3 || cfg.kernel_size % 2 == 0)
        throw std::invalid_argument("DetectConfig: kernel_size must be odd and >= 3");
    if (cfg.gaussian_sigma <= 0.0)
        throw std::invalid_argument("DetectConfig: gaussian_sigma must be > 0");
    if (!(cfg.canny_low < cfg.canny_high))
        throw std::invalid_argument("DetectConfig: canny_low must be < canny_high");
    if (cfg.area_threshold < 0)
        throw std::invalid_argument("DetectConfig: area_threshold must be >= 0");
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

constexpr double kDirPi = 3.14159265358979323846;

}  // namespace

GrayImage gaussianBlur(const GrayImage& img, const DetectConfig& cfg) {
    checkConfig(cfg);
    const int half = cfg.kernel_size / 2;
    std::vector<double> kernel(cfg.kernel_size);
    double sum = 0.0;
    for (int i = 0; i < cfg.kernel_size; ++i) {
        double x = i - half;
        kernel[i] = std::exp(-x * x / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma));
        sum += kernel[i];
    }
    for (double& k : kernel) k /= sum;

    const int w = img.width, h = img.height;
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)  // horizontal pass, replicated borders
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i)
                acc += kernel[i + half] * img.at(clampi(x + i, 0, w - 1), y);
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i)
                acc += kernel[i + half] * tmp[static_cast<std::size_t>(clampi(y + i, 0, h - 1)) * w + x];
            out.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
        }
    return out;
}

GrayImage cannyEdges(const GrayImage& img, const DetectConfig& cfg) {
    checkConfig(cfg);
    const int w = img.width, h = img.height;
    GrayImage out(w, h, 0);
    if (w < 3 || h < 3) return out;

    std::vector<double> mag(static_cast<std::size_t>(w) * h, 0.0);
    std::vector<std::uint8_t> dir(static_cast<std::size_t>(w) * h, 0);

    auto px = [&img, w, h](int x, int y) {
        return static_cast<double>(img.at(clampi(x, 0, w - 1), clampi(y, 0, h - 1)));
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx = -px(x - 1, y - 1) + px(x + 1, y - 1) - 2.0 * px(x - 1, y) +
                        2.0 * px(x + 1, y) - px(x - 1, y + 1) + px(x + 1, y + 1);
            double gy = -px(x - 1, y - 1) - 2.0 * px(x, y - 1) - px(x + 1, y - 1) +
                        px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1);
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            mag[i] = std::hypot(gx, gy);
            double angle = std::atan2(gy, gx);  // [-pi, pi]
            if (angle < 0.0) angle += kDirPi;   // fold to [0, pi)
            int bin = static_cast<int>(std::floor(angle / (kDirPi / 4.0) + 0.5)) % 4;
            dir[i] = static_cast<std::uint8_t>(bin);
        }
    }

    // Offsets per quantized gradient direction (0, 45, 90, 135 degrees).
    static const int kOff[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};

    // Non-maximum suppression. The asymmetric tie rule (>= behind, > ahead)
    // keeps step edges one pixel wide.
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(w) * h, 0);
    auto magAt = [&](int x, int y) -> double {
        if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
        return mag[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (mag[i] <= 0.0) continue;
            const int* o = kOff[dir[i]];
            if (mag[i] >= magAt(x - o[0], y - o[1]) && mag[i] > magAt(x + o[0], y + o[1]))
                keep[i] = 1;
        }

    // Hysteresis: strong pixels seed, weak survivors join when 8-connected.
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (keep[i] && mag[i] >= cfg.canny_high && out.at(x, y) == 0) {
                out.at(x, y) = 255;
                stack.emplace_back(x, y);
                while (!stack.empty()) {
                    auto [cx, cy] = stack.back();
                    stack.pop_back();
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            int nx = cx + dx, ny = cy + dy;
                            if (!out.inside(nx, ny) || out.at(nx, ny)) continue;
                            std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                            if (keep[ni] && mag[ni] >= cfg.canny_low) {
                                out.at(nx, ny) = 255;
                                stack.emplace_back(nx, ny);
                            }
                        }
                }
            }
        }
    return out;
}

std::vector<DefectBox> detectDefects(const GrayImage& binary, const DetectConfig& cfg) {
    const int w = binary.width, h = binary.height;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<DefectBox> defects;
    std::vector<std::pair<int, int>> stack;

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!binary.data[i] || seen[i]) continue;
            seen[i] = 1;
            stack.assign(1, {x, y});
            DefectBox d;
            d.box = PixelBox{x, y, x, y};
            long long sx = 0, sy = 0;
            int count = 0;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++count;
                sx += cx;
                sy += cy;
                d.box.x0 = std::min(d.box.x0, cx);
                d.box.x1 = std::max(d.box.x1, cx);
                d.box.y0 = std::min(d.box.y0, cy);
                d.box.y1 = std::max(d.box.y1, cy);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (binary.data[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.emplace_back(nx, ny);
                        }
                    }
            }
            d.area = count;
            d.centroid_x = static_cast<double>(sx) / count;
            d.centroid_y = static_cast<double>(sy) / count;
            if (d.area >= cfg.area_threshold) defects.push_back(d);
        }
    return defects;
}

std::vector<DefectBox> detectDefectsInImage(const GrayImage& img, const DetectConfig& cfg) {
    return detectDefects(cannyEdges(gaussianBlur(img, cfg), cfg), cfg);
}

DetectionMetrics metricsFromCounts(int tp, int fp, int fn) {
    DetectionMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f_measure = m.precision + m.recall > 0.0
                      ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                      : 0.0;
    return m;
}

DetectionMetrics scoreDetections(const std::vector<PixelBox>& detected,
                                 const std::vector<PixelBox>& ground_truth,
                                 double iou_threshold,
                                 std::vector<std::pair<int, int>>* matches_out) {
    if (!(iou_threshold > 0.0) || iou_threshold >= 1.0)
        throw std::invalid_argument("scoreDetections: iou_threshold out of (0, 1)");

    struct Cand {
        double iou;
        int det, truth;
    };
    std::vector<Cand> cands;
    for (std::size_t d = 0; d < detected.size(); ++d)
        for (std::size_t t = 0; t < ground_truth.size(); ++t) {
            double iou = boxIou(detected[d], ground_truth[t]);
            if (iou >= iou_threshold)
                cands.push_back({iou, static_cast<int>(d), static_cast<int>(t)});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.det != b.det) return a.det < b.det;
        return a.truth < b.truth;
    });

    std::vector<char> det_used(detected.size(), 0), truth_used(ground_truth.size(), 0);
    int tp = 0;
    if (matches_out) matches_out->clear();
    for (const Cand& c : cands) {
        if (det_used[c.det] || truth_used[c.truth]) continue;
        det_used[c.det] = truth_used[c.truth] = 1;
        if (matches_out) matches_out->emplace_back(c.det, c.truth);
        ++tp;
    }
    return metricsFromCounts(tp, static_cast<int>(detected.size()) - tp,
                             static_cast<int>(ground_truth.size()) - tp);
}

void writeMetricsCsv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "part_id,TP,FP,FN,precision,recall,f_measure\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, ",%d,%d,%d,%.3f,%.3f,%.3f", row.metrics.tp,
                      row.metrics.fp, row.metrics.fn, row.metrics.precision,
                      row.metrics.recall, row.metrics.f_measure);
        out << row.part_id << buf << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace linescan
