#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "shield/csv.hpp"
#include "shield/datamodel.hpp"
#include "shield/preprocess.hpp"

namespace shield {

enum class SelectionMethod { ANOVA_F, MUTUAL_INFO, RFE_RANK };

inline const char* method_name(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::ANOVA_F: return "anova_f";
        case SelectionMethod::MUTUAL_INFO: return "mutual_info";
        case SelectionMethod::RFE_RANK: return "rfe_rank";
    }
    return "?";
}

struct FeatureScore {
    std::string feature;
    double score = 0.0;  // F statistic, MI in nats, or elimination round
    bool selected = false;
};

struct FeatureScoreTable {
    SelectionMethod method = SelectionMethod::ANOVA_F;
    std::vector<FeatureScore> entries;  // one per feature, original column order
};

namespace detail {

inline void check_binary_labels(const std::vector<int>& y) {
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v == 0) has0 = true;
        else if (v == 1) has1 = true;
        else throw DataError("labels must be binary 0/1");
    }
    if (!has0 || !has1) throw DataError("both classes must be present");
}

}  // namespace detail

/// Two-group ANOVA F statistic per feature. Zero within-group variance with
/// differing group means yields the +infinity sentinel.
inline FeatureScoreTable anova_f(const FeatureMatrix& X, const std::vector<int>& y) {
    detail::check_binary_labels(y);
    if (X.rows() < 3) throw DataError("anova_f: need at least 3 rows");
    std::size_t n = X.rows();
    double n0 = 0, n1 = 0;
    for (int v : y) (v == 0 ? n0 : n1) += 1.0;

    FeatureScoreTable table;
    table.method = SelectionMethod::ANOVA_F;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        double s0 = 0, s1 = 0;
        for (std::size_t r = 0; r < n; ++r) (y[r] == 0 ? s0 : s1) += X.at(r, c);
        double mu0 = s0 / n0, mu1 = s1 / n1;
        double mu = (s0 + s1) / static_cast<double>(n);
        double ssb = n0 * (mu0 - mu) * (mu0 - mu) + n1 * (mu1 - mu) * (mu1 - mu);
        double ssw = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double d = X.at(r, c) - (y[r] == 0 ? mu0 : mu1);
            ssw += d * d;
        }
        double msb = ssb / 1.0;  // G - 1 = 1
        double msw = ssw / static_cast<double>(n - 2);
        double f;
        if (msw > 0.0) f = msb / msw;
        else f = msb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        table.entries.push_back({X.column_names()[c], f, false});
    }
    return table;
}

/// Mutual information in nats between each feature (discretized into
/// equal-frequency bins) and the binary label. Bin edges come from sorted
/// quantile ranks; tied values always share a bin, so a constant feature
/// collapses to a single bin and scores 0.
inline FeatureScoreTable mutual_info(const FeatureMatrix& X, const std::vector<int>& y,
                                     std::size_t bins = 10) {
    if (bins < 2) throw DataError("mutual_info: bins must be >= 2");
    std::size_t n = X.rows();
    FeatureScoreTable table;
    table.method = SelectionMethod::MUTUAL_INFO;

    for (std::size_t c = 0; c < X.cols(); ++c) {
        std::vector<double> sorted(n);
        for (std::size_t r = 0; r < n; ++r) sorted[r] = X.at(r, c);
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> edges;
        for (std::size_t b = 1; b < bins; ++b) {
            std::size_t rank = (n * b + bins - 1) / bins;  // ceil(n*b/bins)
            if (rank >= 1 && rank <= n) edges.push_back(sorted[rank - 1]);
        }

        std::vector<std::vector<double>> joint(bins, std::vector<double>(2, 0.0));
        std::vector<double> pb(bins, 0.0), pc(2, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double x = X.at(r, c);
            std::size_t b = 0;
            for (double e : edges)
                if (x > e) ++b;
            double w = 1.0 / static_cast<double>(n);
            joint[b][y[r]] += w;
            pb[b] += w;
            pc[y[r]] += w;
        }
        double mi = 0.0;
        for (std::size_t b = 0; b < bins; ++b)
            for (int k = 0; k < 2; ++k)
                if (joint[b][k] > 0.0)
                    mi += joint[b][k] * std::log(joint[b][k] / (pb[b] * pc[k]));
        table.entries.push_back({X.column_names()[c], std::max(mi, 0.0), false});
    }
    return table;
}

namespace detail {

/// L2-regularized logistic regression by full-batch gradient descent.
/// Deterministic: zero init, 500 iterations, step 0.1, bias unregularized.
inline std::vector<double> logreg_weights(const FeatureMatrix& X, const std::vector<int>& y,
                                          const std::vector<std::size_t>& cols,
                                          double lambda = 1.0, int iters = 500, double step = 0.1) {
    std::size_t n = X.rows(), d = cols.size();
    std::vector<double> w(d, 0.0);
    double bias = 0.0;
    std::vector<double> grad(d);
    for (int it = 0; it < iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double gbias = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double z = bias;
            for (std::size_t j = 0; j < d; ++j) z += w[j] * X.at(r, cols[j]);
            double p = 1.0 / (1.0 + std::exp(-z));
            double err = p - static_cast<double>(y[r]);
            for (std::size_t j = 0; j < d; ++j) grad[j] += err * X.at(r, cols[j]);
            gbias += err;
        }
        double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j)
            w[j] -= step * inv_n * (grad[j] + lambda * w[j]);
        bias -= step * inv_n * gbias;
    }
    return w;
}

}  // namespace detail

/// Recursive feature elimination over a logistic-regression base estimator.
/// Each round refits on the surviving features (standardized internally),
/// ranks by |weight| and drops the lowest max(1, ceil(10%)). Score is the
/// round a feature was eliminated in; survivors share the final round.
inline FeatureScoreTable rfe_select(const FeatureMatrix& X, const std::vector<int>& y,
                                    std::size_t k_target) {
    detail::check_binary_labels(y);
    if (k_target < 1) throw DataError("rfe_select: k_target must be >= 1");
    if (k_target > X.cols()) throw DataError("rfe_select: k_target exceeds feature count");

    auto [Xs, stats] = standard_scale(X);
    std::vector<std::size_t> alive(X.cols());
    for (std::size_t c = 0; c < X.cols(); ++c) alive[c] = c;

    FeatureScoreTable table;
    table.method = SelectionMethod::RFE_RANK;
    table.entries.resize(X.cols());
    for (std::size_t c = 0; c < X.cols(); ++c)
        table.entries[c] = {X.column_names()[c], 0.0, false};

    int round = 0;
    while (alive.size() > k_target) {
        ++round;
        auto w = detail::logreg_weights(Xs, y, alive);
        std::size_t n_drop = std::max<std::size_t>(
            1, (alive.size() + 9) / 10);  // ceil(10%)
        n_drop = std::min(n_drop, alive.size() - k_target);
        // Drop the n_drop features with smallest |weight| (ties: lower column first).
        std::vector<std::size_t> order(alive.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(w[a]) < std::abs(w[b]);
        });
        std::vector<std::uint8_t> dropped(alive.size(), 0);
        for (std::size_t i = 0; i < n_drop; ++i) {
            dropped[order[i]] = 1;
            table.entries[alive[order[i]]].score = static_cast<double>(round);
        }
        std::vector<std::size_t> next;
        for (std::size_t i = 0; i < alive.size(); ++i)
            if (!dropped[i]) next.push_back(alive[i]);
        alive = std::move(next);
    }
    double final_round = static_cast<double>(round + 1);
    for (std::size_t c : alive) {
        table.entries[c].score = final_round;
        table.entries[c].selected = true;
    }
    return table;
}

/// Mark each table's top_k entries as selected (higher score wins; +infinity
/// sentinels outrank all finite scores; ties keep original column order).
inline void mark_top_k(FeatureScoreTable& table, std::size_t top_k) {
    std::vector<std::size_t> order(table.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.entries[a].score > table.entries[b].score;
    });
    for (auto& e : table.entries) e.selected = false;
    for (std::size_t i = 0; i < std::min(top_k, order.size()); ++i)
        table.entries[order[i]].selected = true;
}

/// Union of the selected features across tables, ordered by original column
/// order of the first table.
inline std::vector<std::string> union_select(const std::vector<FeatureScoreTable>& tables) {
    if (tables.empty()) throw DataError("union_select: no score tables given");
    std::vector<std::string> out;
    for (const auto& e : tables.front().entries) {
        bool chosen = false;
        for (const auto& t : tables)
            for (const auto& te : t.entries)
                if (te.feature == e.feature && te.selected) chosen = true;
        if (chosen) out.push_back(e.feature);
    }
    if (out.empty()) throw DataError("union_select: empty final feature set");
    return out;
}

/// Score tables as CSV: feature, method, score, selected. The +infinity
/// sentinel serializes as "inf".
inline void write_score_csv(const std::string& path, const std::vector<FeatureScoreTable>& tables) {
    csv::Table t;
    t.header = {"feature", "method", "score", "selected"};
    for (const auto& table : tables)
        for (const auto& e : table.entries) {
            std::string score = std::isinf(e.score) ? "inf" : csv::format_double(e.score);
            t.rows.push_back({e.feature, method_name(table.method), score, e.selected ? "1" : "0"});
        }
    csv::write_file(path, t);
}

}  // namespace shield
