#pragma once

#include "linescan/image.hpp"

#include <string>
#include <vector>

namespace linescan {

struct DetectConfig {
    double gaussian_sigma = 1.4;
    int kernel_size = 5;        // odd, >= 3
    double canny_low = 40.0;    // raw Sobel gradient magnitude
    double canny_high = 100.0;
    int area_threshold = 50;    // s, minimum component pixel count
    double iou_threshold = 0.3;
};

/// A connected edge component large enough to count as a defect.
struct DefectBox {
    PixelBox box;
    int area = 0;          // component pixel count
    double centroid_x = 0; // mean pixel coordinates
    double centroid_y = 0;
};

struct DetectionMetrics {
    int tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f_measure = 0.0;
};

/// Separable Gaussian smoothing; kernel normalized to sum one, borders by
/// edge replication.
GrayImage gaussianBlur(const GrayImage& img, const DetectConfig& cfg);

/// Canny: Sobel gradients, non-maximum suppression over four quantized
/// directions, double-threshold hysteresis. Output pixels are 0 or 255.
GrayImage cannyEdges(const GrayImage& img, const DetectConfig& cfg);

/// 8-connected components of nonzero pixels; components with pixel count
/// >= cfg.area_threshold become defects. Discovery order is row-major, so
/// the output is deterministic.
std::vector<DefectBox> detectDefects(const GrayImage& binary, const DetectConfig& cfg);

/// Full image pipeline: blur, Canny, component filtering.
std::vector<DefectBox> detectDefectsInImage(const GrayImage& img, const DetectConfig& cfg);

DetectionMetrics metricsFromCounts(int tp, int fp, int fn);

/// Greedy one-to-one matching by descending IoU; matches at or above
/// iou_threshold are true positives. `matches_out`, when given, receives the
/// matched (detected, truth) index pairs.
DetectionMetrics scoreDetections(const std::vector<PixelBox>& detected,
                                 const std::vector<PixelBox>& ground_truth,
                                 double iou_threshold,
                                 std::vector<std::pair<int, int>>* matches_out = nullptr);

struct MetricsRow {
    std::string part_id;
    DetectionMetrics metrics;
};

/// CSV with header part_id,TP,FP,FN,precision,recall,f_measure (3 decimals).
void writeMetricsCsv(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace linescan
