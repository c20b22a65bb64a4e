#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shield/datamodel.hpp"
#include "shield/detectors/threshold.hpp"
#include "shield/rng.hpp"

namespace shield {

struct IsoNode {
    int feature = -1;  // -1 = external node
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t size = 0;  // external node sample count
};

struct IsoTree {
    std::vector<IsoNode> nodes;
};

struct IsoForestModel {
    std::vector<IsoTree> trees;
    std::size_t subsample = 256;  // psi
    int height_limit = 8;         // ceil(log2 psi)
    double contamination = 0.2;
    std::uint64_t seed = 0;
};

/// Average path length adjustment c(n): c(1) = 0, c(2) = 1 (exact harmonic
/// number), larger n via H(i) ~ ln(i) + Euler-Mascheroni.
inline double iso_c(std::size_t n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    double m = static_cast<double>(n);
    double harmonic = std::log(m - 1.0) + 0.5772156649;
    return 2.0 * harmonic - 2.0 * (m - 1.0) / m;
}

namespace iso_detail {

inline int build(IsoTree& tree, const FeatureMatrix& X, std::vector<std::size_t>& rows,
                 std::size_t begin, std::size_t end, int depth, int limit, CounterRng& rng) {
    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    std::size_t count = end - begin;
    if (count <= 1 || depth >= limit) {
        tree.nodes[id].size = count;
        return id;
    }
    // Pick a feature with spread; give up after trying every feature once.
    std::size_t d = X.cols();
    int feature = -1;
    double lo = 0.0, hi = 0.0;
    std::size_t first = rng.uniform_index(d);
    for (std::size_t t = 0; t < d; ++t) {
        std::size_t c = (first + t) % d;
        double mn = X.at(rows[begin], c), mx = mn;
        for (std::size_t i = begin + 1; i < end; ++i) {
            double v = X.at(rows[i], c);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (mx > mn) {
            feature = static_cast<int>(c);
            lo = mn;
            hi = mx;
            break;
        }
    }
    if (feature < 0) {  // all duplicate rows
        tree.nodes[id].size = count;
        return id;
    }
    double split = rng.uniform(lo, hi);
    auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                 rows.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t r) { return X.at(r, feature) < split; });
    auto mid = static_cast<std::size_t>(mid_it - rows.begin());
    if (mid == begin || mid == end) {  // split landed on the boundary value
        tree.nodes[id].size = count;
        return id;
    }
    tree.nodes[id].feature = feature;
    tree.nodes[id].split = split;
    int left = build(tree, X, rows, begin, mid, depth + 1, limit, rng);
    int right = build(tree, X, rows, mid, end, depth + 1, limit, rng);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
}

inline double path_length(const IsoTree& tree, const double* row) {
    int id = 0;
    double depth = 0.0;
    while (tree.nodes[id].feature >= 0) {
        id = row[tree.nodes[id].feature] < tree.nodes[id].split ? tree.nodes[id].left
                                                                : tree.nodes[id].right;
        depth += 1.0;
    }
    return depth + iso_c(tree.nodes[id].size);
}

}  // namespace iso_detail

inline IsoForestModel isoforest_fit(const FeatureMatrix& X, const DetectorSpec& spec) {
    if (X.rows() == 0) throw DetectorError("isoforest_fit: empty training set");
    IsoForestModel model;
    model.subsample = std::min<std::size_t>(static_cast<std::size_t>(spec.subsample), X.rows());
    model.height_limit =
        static_cast<int>(std::ceil(std::log2(std::max<std::size_t>(model.subsample, 2))));
    model.contamination = spec.contamination;
    model.seed = spec.seed;

    CounterRng master(spec.seed);
    std::vector<std::size_t> all(X.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    for (int t = 0; t < spec.n_trees; ++t) {
        CounterRng rng = master.derive(static_cast<std::uint64_t>(t));  // per-tree seed
        std::vector<std::size_t> idx = all;
        rng.shuffle(idx);
        idx.resize(model.subsample);
        IsoTree tree;
        iso_detail::build(tree, X, idx, 0, idx.size(), 0, model.height_limit, rng);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

/// s(x) = 2^(-E[h(x)] / c(psi)), strictly decreasing in the mean path length.
inline std::vector<double> isoforest_score(const IsoForestModel& model, const FeatureMatrix& X) {
    double norm = iso_c(model.subsample);
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double total = 0.0;
        for (const auto& tree : model.trees) total += iso_detail::path_length(tree, X.row_ptr(r));
        double mean = total / static_cast<double>(model.trees.size());
        out[r] = std::pow(2.0, -mean / norm);
    }
    return out;
}

/// Flag exactly round(contamination * n) rows with the highest scores.
inline std::vector<int> isoforest_flags(const IsoForestModel& model,
                                        const std::vector<double>& scores) {
    return top_fraction_flags(scores, model.contamination);
}

}  // namespace shield
