#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "shield/datamodel.hpp"

namespace shield {

/// Nearest-rank percentile: the value at 1-based index ceil(p/100 * n) of the
/// ascending-sorted sample (clamped to [1, n]).
inline double nearest_rank_percentile(std::vector<double> scores, double percentile) {
    if (scores.empty()) throw DataError("percentile of empty sample");
    std::sort(scores.begin(), scores.end());
    auto n = static_cast<double>(scores.size());
    auto idx = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
    idx = std::clamp<std::size_t>(idx, 1, scores.size());
    return scores[idx - 1];
}

/// flag = score strictly above the nearest-rank percentile threshold.
inline std::vector<int> threshold_flags(const std::vector<double>& scores, double percentile) {
    double threshold = nearest_rank_percentile(scores, percentile);
    std::vector<int> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold ? 1 : 0;
    return flags;
}

/// Flag exactly round(fraction * n) rows with the highest scores, ties broken
/// by lower row index.
inline std::vector<int> top_fraction_flags(const std::vector<double>& scores, double fraction) {
    auto n = scores.size();
    auto quota = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<int> flags(n, 0);
    for (std::size_t i = 0; i < std::min(quota, n); ++i) flags[order[i]] = 1;
    return flags;
}

}  // namespace shield
