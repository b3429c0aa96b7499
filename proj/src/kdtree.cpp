#include "linescan/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace linescan {

KdTree3::KdTree3(const std::vector<Vec3>& points) : pts_(&points) {
    std::vector<int> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(points.size());
    root_ = build(idx, 0, static_cast<int>(idx.size()));
}

int KdTree3::build(std::vector<int>& idx, int lo, int hi) {
    if (lo >= hi) return -1;
    const auto& pts = *pts_;

    Vec3 mn = pts[idx[lo]], mx = pts[idx[lo]];
    for (int i = lo + 1; i < hi; ++i) {
        mn = mn.cwiseMin(pts[idx[i]]);
        mx = mx.cwiseMax(pts[idx[i]]);
    }
    int axis = 0;
    Vec3 ext = mx - mn;
    if (ext.y() > ext.x()) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;

    int mid = (lo + hi) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&pts, axis](int a, int b) {
                         double ca = pts[a][axis], cb = pts[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{idx[mid], -1, -1, axis});
    int left = build(idx, lo, mid);
    int right = build(idx, mid + 1, hi);
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
}

int KdTree3::nearest(const Vec3& query, double* dist2_out) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearestRec(root_, query, best, best_d2);
    if (dist2_out) *dist2_out = best_d2;
    return best;
}

void KdTree3::nearestRec(int node, const Vec3& q, int& best, double& best_d2) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = (*pts_)[n.point];
    double d2 = (p - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
        best_d2 = d2;
        best = n.point;
    }
    double delta = q[n.axis] - p[n.axis];
    int near = delta < 0.0 ? n.left : n.right;
    int far = delta < 0.0 ? n.right : n.left;
    nearestRec(near, q, best, best_d2);
    if (delta * delta <= best_d2) nearestRec(far, q, best, best_d2);
}

std::vector<int> KdTree3::knn(const Vec3& query, int k) const {
    std::vector<KnnEntry> heap;  // max-heap on (d2, index)
    if (k > 0) knnRec(root_, query, k, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<int> out;
    out.reserve(heap.size());
    for (const auto& e : heap) out.push_back(e.index);
    return out;
}

void KdTree3::knnRec(int node, const Vec3& q, int k, std::vector<KnnEntry>& heap) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = (*pts_)[n.point];
    KnnEntry cand{(p - q).squaredNorm(), n.point};
    if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
    } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
    }
    double delta = q[n.axis] - p[n.axis];
    int near = delta < 0.0 ? n.left : n.right;
    int far = delta < 0.0 ? n.right : n.left;
    knnRec(near, q, k, heap);
    bool full = static_cast<int>(heap.size()) >= k;
    if (!full || delta * delta <= heap.front().d2) knnRec(far, q, k, heap);
}

}  // namespace linescan
