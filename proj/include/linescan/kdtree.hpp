#pragma once

#include "linescan/geometry.hpp"

#include <vector>

namespace linescan {

/// 3-d kd-tree over a borrowed point array. Queries break distance ties by
/// preferring the lower point index, which keeps every consumer deterministic.
class KdTree3 {
public:
    explicit KdTree3(const std::vector<Vec3>& points);

    /// Index of the nearest point, -1 when the tree is empty.
    int nearest(const Vec3& query, double* dist2_out = nullptr) const;

    /// The k nearest points, ascending by (distance, index). Returns fewer
    /// than k entries when the tree is smaller than k.
    std::vector<int> knn(const Vec3& query, int k) const;

    std::size_t size() const { return pts_->size(); }

private:
    struct Node {
        int point = -1;
        int left = -1;
        int right = -1;
        int axis = 0;
    };

    int build(std::vector<int>& idx, int lo, int hi);
    void nearestRec(int node, const Vec3& q, int& best, double& best_d2) const;

    struct KnnEntry {
        double d2;
        int index;
        bool operator<(const KnnEntry& o) const {
            return d2 < o.d2 || (d2 == o.d2 && index < o.index);
        }
    };
    void knnRec(int node, const Vec3& q, int k, std::vector<KnnEntry>& heap) const;

    const std::vector<Vec3>* pts_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace linescan
