#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shield/datamodel.hpp"

namespace shield {

struct GbdtNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;  // leaf value
};

struct GbdtTree {
    std::vector<GbdtNode> nodes;

    double predict(const double* row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].weight;
    }
};

/// Gradient-boosted trees on logistic loss. Splits are exact greedy over all
/// features and sorted thresholds; gain and leaf weights follow the
/// second-order formulation with L2 leaf regularization.
struct GbdtModel {
    double base_score = 0.0;  // log-odds
    double learning_rate = 0.1;
    int max_depth = 6;
    double l2_lambda = 1.0;
    std::vector<GbdtTree> trees;
    std::vector<double> train_logloss;  // one entry per round, after that round
};

namespace gbdt_detail {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

inline double leaf_gain(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace gbdt_detail

inline GbdtModel gbdt_fit(const FeatureMatrix& X, const std::vector<int>& y,
                          const DetectorSpec& spec) {
    std::size_t n = X.rows(), d = X.cols();
    double pos = 0.0;
    for (int v : y) pos += static_cast<double>(v);
    if (pos == 0.0 || pos == static_cast<double>(n))
        throw DetectorError("gbdt_fit: training labels contain a single class");

    GbdtModel model;
    model.learning_rate = spec.learning_rate;
    model.max_depth = spec.max_depth;
    model.l2_lambda = spec.l2_lambda;
    double prior = pos / static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    // Row indices presorted per feature, shared by every round.
    std::vector<std::vector<std::uint32_t>> sorted(d, std::vector<std::uint32_t>(n));
    for (std::size_t c = 0; c < d; ++c) {
        auto& idx = sorted[c];
        for (std::size_t r = 0; r < n; ++r) idx[r] = static_cast<std::uint32_t>(r);
        std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return X.at(a, c) < X.at(b, c);
        });
    }

    std::vector<double> margin(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    const double lambda = model.l2_lambda;

    for (int round = 0; round < spec.n_rounds; ++round) {
        for (std::size_t r = 0; r < n; ++r) {
            double p = 1.0 / (1.0 + std::exp(-margin[r]));
            grad[r] = p - static_cast<double>(y[r]);
            hess[r] = p * (1.0 - p);
        }

        GbdtTree tree;
        tree.nodes.push_back({});
        std::vector<int> node_of(n, 0);          // -1 once a row reaches a leaf
        std::vector<int> level = {0};            // node ids at the current depth

        for (int depth = 0; depth < model.max_depth && !level.empty(); ++depth) {
            std::size_t w = level.size();
            std::vector<int> slot(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < w; ++s) slot[level[s]] = static_cast<int>(s);

            std::vector<double> totG(w, 0.0), totH(w, 0.0);
            std::vector<std::size_t> totN(w, 0);
            for (std::size_t r = 0; r < n; ++r) {
                int nd = node_of[r];
                if (nd < 0 || slot[nd] < 0) continue;
                int s = slot[nd];
                totG[s] += grad[r];
                totH[s] += hess[r];
                ++totN[s];
            }

            std::vector<gbdt_detail::SplitCandidate> best(w);
            std::vector<double> runG(w), runH(w), prevVal(w);
            std::vector<std::size_t> runN(w);
            for (std::size_t c = 0; c < d; ++c) {
                std::fill(runG.begin(), runG.end(), 0.0);
                std::fill(runH.begin(), runH.end(), 0.0);
                std::fill(runN.begin(), runN.end(), 0);
                for (std::uint32_t r : sorted[c]) {
                    int nd = node_of[r];
                    if (nd < 0 || slot[nd] < 0) continue;
                    int s = slot[nd];
                    double v = X.at(r, c);
                    if (runN[s] > 0 && v > prevVal[s]) {
                        double gl = runG[s], hl = runH[s];
                        double gr = totG[s] - gl, hr = totH[s] - hl;
                        double gain = 0.5 * (gbdt_detail::leaf_gain(gl, hl, lambda) +
                                             gbdt_detail::leaf_gain(gr, hr, lambda) -
                                             gbdt_detail::leaf_gain(totG[s], totH[s], lambda));
                        if (gain > best[s].gain) {
                            best[s].gain = gain;
                            best[s].feature = static_cast<int>(c);
                            best[s].threshold = 0.5 * (prevVal[s] + v);
                        }
                    }
                    runG[s] += grad[r];
                    runH[s] += hess[r];
                    ++runN[s];
                    prevVal[s] = v;
                }
            }

            std::vector<int> next_level;
            for (std::size_t s = 0; s < w; ++s) {
                int nd = level[s];
                if (best[s].gain > 0.0 && totN[s] >= 2) {
                    tree.nodes[nd].feature = best[s].feature;
                    tree.nodes[nd].threshold = best[s].threshold;
                    tree.nodes[nd].left = static_cast<int>(tree.nodes.size());
                    tree.nodes.push_back({});
                    tree.nodes[nd].right = static_cast<int>(tree.nodes.size());
                    tree.nodes.push_back({});
                    next_level.push_back(tree.nodes[nd].left);
                    next_level.push_back(tree.nodes[nd].right);
                } else {
                    tree.nodes[nd].weight = -totG[s] / (totH[s] + lambda);
                }
            }
            for (std::size_t r = 0; r < n; ++r) {
                int nd = node_of[r];
                if (nd < 0) continue;
                const GbdtNode& node = tree.nodes[nd];
                if (node.feature < 0) node_of[r] = -1;  // settled in a leaf this level
                else node_of[r] = X.at(r, node.feature) < node.threshold ? node.left : node.right;
            }
            level = std::move(next_level);
        }
        // Depth limit reached: remaining nodes become leaves.
        for (int nd : level) {
            double g = 0.0, h = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                if (node_of[r] == nd) {
                    g += grad[r];
                    h += hess[r];
                }
            tree.nodes[nd].weight = -g / (h + lambda);
        }

        double logloss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            margin[r] += model.learning_rate * tree.predict(X.row_ptr(r));
            double p = 1.0 / (1.0 + std::exp(-margin[r]));
            p = std::clamp(p, 1e-15, 1.0 - 1e-15);
            logloss -= y[r] == 1 ? std::log(p) : std::log(1.0 - p);
        }
        model.train_logloss.push_back(logloss / static_cast<double>(n));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

/// Probability of the anomaly class; higher = more anomalous.
inline std::vector<double> gbdt_score(const GbdtModel& model, const FeatureMatrix& X) {
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double margin = model.base_score;
        const double* row = X.row_ptr(r);
        for (const auto& tree : model.trees) margin += model.learning_rate * tree.predict(row);
        out[r] = 1.0 / (1.0 + std::exp(-margin));
    }
    return out;
}

}  // namespace shield
