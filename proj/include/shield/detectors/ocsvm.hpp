#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shield/datamodel.hpp"
#include "shield/rng.hpp"

namespace shield {

/// One-class nu-SVM with RBF kernel, fitted by pairwise coordinate (SMO)
/// updates on the dual: minimize 1/2 a'Ka subject to 0 <= a_i <= 1/(nu*n),
/// sum a = 1. Decision f(x) = sum a_i K(x_i, x) - rho; the anomaly score is
/// rho - sum a_i K(x_i, x), so higher = more anomalous.
struct OcsvmModel {
    FeatureMatrix support_vectors;
    std::vector<double> alpha;  // duals of the support vectors
    double rho = 0.0;
    double gamma = 0.1;
    double nu = 0.1;
};

namespace ocsvm_detail {

inline double rbf(const double* a, const double* b, std::size_t d, double gamma) {
    double dist = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double diff = a[c] - b[c];
        dist += diff * diff;
    }
    return std::exp(-gamma * dist);
}

}  // namespace ocsvm_detail

/// Training labels are not consulted; callers pass only rows treated as
/// normal. Above spec.max_train_rows the training set is a seeded subsample.
inline OcsvmModel ocsvm_fit(const FeatureMatrix& X_normal, const DetectorSpec& spec) {
    FeatureMatrix X = X_normal;
    if (spec.max_train_rows > 0 &&
        X.rows() > static_cast<std::size_t>(spec.max_train_rows)) {
        CounterRng rng(spec.seed ^ 0x0C5F4ULL);
        std::vector<std::size_t> idx(X.rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        rng.shuffle(idx);
        idx.resize(static_cast<std::size_t>(spec.max_train_rows));
        std::sort(idx.begin(), idx.end());
        X = X.select_rows(idx);
    }

    std::size_t n = X.rows(), d = X.cols();
    if (n == 0) throw DetectorError("ocsvm_fit: empty training set");
    if (!(spec.nu > 0.0 && spec.nu <= 1.0)) throw DetectorError("ocsvm_fit: nu must be in (0,1]");
    double C = 1.0 / (spec.nu * static_cast<double>(n));

    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = ocsvm_detail::rbf(X.row_ptr(i), X.row_ptr(j), d, spec.gamma);
            K[i * n + j] = v;
            K[j * n + i] = v;
        }

    // libsvm-style start: the first floor(nu*n) duals at the upper bound, the
    // remainder of the unit mass on the next index.
    std::vector<double> alpha(n, 0.0);
    auto n_full = static_cast<std::size_t>(spec.nu * static_cast<double>(n));
    for (std::size_t i = 0; i < n_full && i < n; ++i) alpha[i] = C;
    if (n_full < n) alpha[n_full] = 1.0 - C * static_cast<double>(n_full);

    std::vector<double> grad(n, 0.0);  // (K alpha)_i
    for (std::size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += K[i * n + j] * alpha[j];
        grad[i] = g;
    }

    constexpr double tol = 1e-6;
    const long max_iter = std::max<long>(500000, static_cast<long>(n) * 100);
    double violation = 0.0;
    bool converged = false;
    for (long it = 0; it < max_iter; ++it) {
        // Most violating pair: smallest gradient among a_i < C, largest among a_j > 0.
        long up = -1, low = -1;
        double g_up = 0.0, g_low = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] < C - 1e-15 && (up < 0 || grad[i] < g_up)) {
                up = static_cast<long>(i);
                g_up = grad[i];
            }
            if (alpha[i] > 1e-15 && (low < 0 || grad[i] > g_low)) {
                low = static_cast<long>(i);
                g_low = grad[i];
            }
        }
        violation = g_low - g_up;
        if (up < 0 || low < 0 || violation <= tol) {
            converged = true;
            break;
        }
        auto i = static_cast<std::size_t>(up);
        auto j = static_cast<std::size_t>(low);
        double curvature = K[i * n + i] + K[j * n + j] - 2.0 * K[i * n + j];
        curvature = std::max(curvature, 1e-12);
        double delta = violation / curvature;
        delta = std::min({delta, C - alpha[i], alpha[j]});
        alpha[i] += delta;
        alpha[j] -= delta;
        for (std::size_t r = 0; r < n; ++r) grad[r] += delta * (K[r * n + i] - K[r * n + j]);
    }
    if (!converged)
        throw DetectorError("ocsvm_fit: SMO did not converge, residual " + std::to_string(violation));

    // rho from the KKT conditions: gradient average over free support vectors,
    // else the midpoint of the bound gradients.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lo_bound = -1e300, hi_bound = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-12 && alpha[i] < C - 1e-12) {
            free_sum += grad[i];
            ++free_count;
        } else if (alpha[i] <= 1e-12) {
            hi_bound = std::min(hi_bound, grad[i]);
        } else {
            lo_bound = std::max(lo_bound, grad[i]);
        }
    }
    double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                : 0.5 * (lo_bound + hi_bound);

    OcsvmModel model;
    model.gamma = spec.gamma;
    model.nu = spec.nu;
    model.rho = rho;
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 1e-12) sv.push_back(i);
    model.support_vectors = X.select_rows(sv);
    for (std::size_t i : sv) model.alpha.push_back(alpha[i]);
    return model;
}

inline std::vector<double> ocsvm_score(const OcsvmModel& model, const FeatureMatrix& X) {
    std::size_t d = model.support_vectors.cols();
    if (X.cols() != d) throw DetectorError("ocsvm_score: feature width mismatch");
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double f = 0.0;
        for (std::size_t s = 0; s < model.support_vectors.rows(); ++s)
            f += model.alpha[s] *
                 ocsvm_detail::rbf(X.row_ptr(r), model.support_vectors.row_ptr(s), d, model.gamma);
        out[r] = model.rho - f;
    }
    return out;
}

inline std::vector<int> ocsvm_flags(const std::vector<double>& scores) {
    std::vector<int> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > 0.0 ? 1 : 0;
    return flags;
}

}  // namespace shield
