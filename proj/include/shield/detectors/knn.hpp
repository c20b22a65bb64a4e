#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "shield/datamodel.hpp"

namespace shield {

/// Exact k-nearest-neighbor store with Euclidean distance. The anomaly score
/// of a query is the fraction of anomalous labels among its k neighbors;
/// distance ties break toward the lower training-row index.
struct KnnModel {
    FeatureMatrix train;
    std::vector<int> labels;
    int k = 5;
};

inline KnnModel knn_fit(const FeatureMatrix& X, const std::vector<int>& y,
                        const DetectorSpec& spec) {
    if (spec.k < 1) throw DetectorError("knn_fit: k must be >= 1");
    if (static_cast<std::size_t>(spec.k) > X.rows())
        throw DetectorError("knn_fit: k exceeds number of training rows");
    if (spec.distance != "euclidean")
        throw DetectorError("knn_fit: unsupported distance metric: " + spec.distance);
    return {X, y, spec.k};
}

namespace detail {

/// kd-tree over the training rows for exact k-nearest search.
///
/// Equivalence with the naive scan: scanning rows in ascending index with a
/// strict-< insertion keeps exactly the k lexicographically smallest
/// (distance, row index) pairs, so the tree maintains its k-best under that
/// ordering and must produce the identical neighbor set in any visit order.
/// Every point distance sums its squared per-column differences in ascending
/// column order, so the values are bit-identical to the naive loop's. A
/// subtree is pruned only when its bounding-box distance is strictly greater
/// than the current k-th best: the box distance uses term-wise smaller
/// addends in the same summation order, and IEEE rounding is monotone, so
/// the computed box distance never exceeds the computed distance of any
/// point inside — a pruned subtree cannot contain a closer neighbor.
class KdTree {
public:
    KdTree(const FeatureMatrix& pts, std::size_t leaf_size = 32)
        : d_(pts.cols()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
        std::size_t n = pts.rows();
        order_.resize(n);
        for (std::size_t i = 0; i < n; ++i) order_[i] = i;
        build(pts, 0, n);
        // Pack rows in leaf order so leaf scans run over contiguous memory.
        packed_.resize(n * d_);
        for (std::size_t i = 0; i < n; ++i) {
            const double* rp = pts.row_ptr(order_[i]);
            std::copy(rp, rp + d_, packed_.begin() + i * d_);
        }
    }

    /// Fills dist/idx (each of size k, k <= n) with the k lexicographically
    /// smallest (distance, row index) pairs in ascending order.
    void knearest(const double* qp, std::size_t k, double* dist, std::size_t* idx) const {
        Best b{dist, idx, k, 0};
        if (!nodes_.empty()) search(0, qp, b);
    }

private:
    struct Node {
        std::size_t begin, end;          // range in order_
        std::size_t left, right;         // npos for leaves
    };
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    struct Best {
        double* dist;
        std::size_t* idx;
        std::size_t k, filled;

        void offer(double dr, std::size_t r) {
            std::size_t pos;
            if (filled < k) {
                pos = filled++;
            } else {
                if (dr > dist[k - 1] || (dr == dist[k - 1] && r > idx[k - 1])) return;
                pos = k - 1;
            }
            while (pos > 0 && (dist[pos - 1] > dr || (dist[pos - 1] == dr && idx[pos - 1] > r))) {
                dist[pos] = dist[pos - 1];
                idx[pos] = idx[pos - 1];
                --pos;
            }
            dist[pos] = dr;
            idx[pos] = r;
        }
    };

    std::size_t build(const FeatureMatrix& pts, std::size_t begin, std::size_t end) {
        std::size_t id = nodes_.size();
        nodes_.push_back({begin, end, npos, npos});
        std::size_t off = bmin_.size();
        bmin_.resize(off + d_, std::numeric_limits<double>::infinity());
        bmax_.resize(off + d_, -std::numeric_limits<double>::infinity());
        for (std::size_t i = begin; i < end; ++i) {
            const double* rp = pts.row_ptr(order_[i]);
            for (std::size_t c = 0; c < d_; ++c) {
                bmin_[off + c] = std::min(bmin_[off + c], rp[c]);
                bmax_[off + c] = std::max(bmax_[off + c], rp[c]);
            }
        }
        if (end - begin <= leaf_size_ || d_ == 0) return id;
        std::size_t split = 0;
        double widest = -1.0;
        for (std::size_t c = 0; c < d_; ++c) {
            double extent = bmax_[off + c] - bmin_[off + c];
            if (extent > widest) {
                widest = extent;
                split = c;
            }
        }
        std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::size_t a, std::size_t b) {
                             return pts.at(a, split) < pts.at(b, split);
                         });
        std::size_t l = build(pts, begin, mid);
        std::size_t r = build(pts, mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    double box_dist(std::size_t nid, const double* qp) const {
        const double* mn = bmin_.data() + nid * d_;
        const double* mx = bmax_.data() + nid * d_;
        double s = 0.0;
        for (std::size_t c = 0; c < d_; ++c) {
            double diff = qp[c] < mn[c] ? mn[c] - qp[c] : (qp[c] > mx[c] ? qp[c] - mx[c] : 0.0);
            s += diff * diff;
        }
        return s;
    }

    void search(std::size_t nid, const double* qp, Best& b) const {
        const Node& nd = nodes_[nid];
        if (nd.left == npos) {
            for (std::size_t i = nd.begin; i < nd.end; ++i) {
                const double* tp = packed_.data() + i * d_;
                double dr = 0.0;
                for (std::size_t c = 0; c < d_; ++c) {
                    double diff = qp[c] - tp[c];
                    dr += diff * diff;
                }
                b.offer(dr, order_[i]);
            }
            return;
        }
        double dl = box_dist(nd.left, qp);
        double dr = box_dist(nd.right, qp);
        std::size_t first = nd.left, second = nd.right;
        if (dr < dl) {
            std::swap(first, second);
            std::swap(dl, dr);
        }
        if (b.filled < b.k || dl <= b.dist[b.k - 1]) search(first, qp, b);
        if (b.filled < b.k || dr <= b.dist[b.k - 1]) search(second, qp, b);
    }

    std::size_t d_, leaf_size_;
    std::vector<std::size_t> order_;   // training-row index per packed position
    std::vector<Node> nodes_;
    std::vector<double> bmin_, bmax_;  // per node, d_ values each
    std::vector<double> packed_;       // training rows reordered by order_
};

}  // namespace detail

inline std::vector<double> knn_score(const KnnModel& model, const FeatureMatrix& query) {
    std::size_t n = model.train.rows(), d = model.train.cols();
    if (query.cols() != d) throw DetectorError("knn_score: feature width mismatch");
    auto k = static_cast<std::size_t>(model.k);

    detail::KdTree tree(model.train);
    std::vector<double> out(query.rows());
    std::vector<double> heap_dist(k);
    std::vector<std::size_t> heap_idx(k);
    for (std::size_t q = 0; q < query.rows(); ++q) {
        tree.knearest(query.row_ptr(q), k, heap_dist.data(), heap_idx.data());
        double votes = 0.0;
        for (std::size_t i = 0; i < k; ++i) votes += model.labels[heap_idx[i]];
        out[q] = votes / static_cast<double>(k);
    }
    (void)n;
    return out;
}

/// Majority vote; with odd k there are no vote ties.
inline std::vector<int> knn_flags(const std::vector<double>& scores) {
    std::vector<int> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] >= 0.5 ? 1 : 0;
    return flags;
}

}  // namespace shield
