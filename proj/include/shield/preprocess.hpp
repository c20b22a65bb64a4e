#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shield/datamodel.hpp"

namespace shield {

/// Per-column statistics fitted on training rows only. Population standard
/// deviation throughout.
struct ScalerStats {
    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<double> min;
    std::vector<double> max;
    bool fitted = false;
};

namespace detail {

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Per-column medians over non-missing cells. All-missing column is an error.
inline std::vector<double> fit_medians(const FeatureMatrix& m) {
    std::vector<double> medians(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::vector<double> vals;
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (!m.is_missing(r, c)) vals.push_back(m.at(r, c));
        if (vals.empty())
            throw DataError("impute_median: column is entirely missing: " + m.column_names()[c]);
        medians[c] = detail::median_of(std::move(vals));
    }
    return medians;
}

/// Replace missing cells by the given per-column medians (typically fitted on
/// training rows). The result carries an all-clear missing mask.
inline FeatureMatrix impute_median(const FeatureMatrix& m, const std::vector<double>& medians) {
    if (medians.size() != m.cols()) throw DataError("impute_median: stats width mismatch");
    FeatureMatrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.is_missing(r, c)) {
                out.at(r, c) = medians[c];
                out.set_missing(r, c, false);
            }
    return out;
}

inline FeatureMatrix impute_median(const FeatureMatrix& m) { return impute_median(m, fit_medians(m)); }

/// One-hot encoder with vocabulary frozen at fit time; unseen categories map
/// to all-zeros.
struct OneHotEncoder {
    std::string column;
    std::vector<std::string> categories;  // lexicographic

    static OneHotEncoder fit(const std::string& column, const std::vector<std::string>& values) {
        OneHotEncoder enc;
        enc.column = column;
        std::set<std::string> seen(values.begin(), values.end());
        enc.categories.assign(seen.begin(), seen.end());
        return enc;
    }

    std::vector<std::string> column_names() const {
        std::vector<std::string> names;
        for (const auto& c : categories) names.push_back(column + "=" + c);
        return names;
    }

    /// One row per input value, one binary column per category.
    std::vector<std::vector<double>> transform(const std::vector<std::string>& values) const {
        std::vector<std::vector<double>> cols(categories.size(),
                                              std::vector<double>(values.size(), 0.0));
        for (std::size_t r = 0; r < values.size(); ++r)
            for (std::size_t c = 0; c < categories.size(); ++c)
                if (values[r] == categories[c]) cols[c][r] = 1.0;
        return cols;
    }
};

inline ScalerStats fit_standard(const FeatureMatrix& m) {
    ScalerStats s;
    s.columns = m.column_names();
    s.fitted = true;
    std::size_t n = m.rows();
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double sum = 0.0, sum2 = 0.0, lo = 0.0, hi = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double x = m.at(r, c);
            sum += x;
            if (r == 0) lo = hi = x;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        double mean = n ? sum / static_cast<double>(n) : 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double d = m.at(r, c) - mean;
            sum2 += d * d;
        }
        double var = n ? sum2 / static_cast<double>(n) : 0.0;
        s.mean.push_back(mean);
        s.stddev.push_back(std::sqrt(var));
        s.min.push_back(lo);
        s.max.push_back(hi);
    }
    return s;
}

/// x' = (x - mean) / std; constant columns map to 0. Absent stats means
/// fit-and-transform; present stats are applied unchanged.
inline std::pair<FeatureMatrix, ScalerStats> standard_scale(const FeatureMatrix& m,
                                                            std::optional<ScalerStats> stats = {}) {
    ScalerStats s = stats ? *stats : fit_standard(m);
    if (s.mean.size() != m.cols()) throw DataError("standard_scale: stats width mismatch");
    FeatureMatrix out = m;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double sd = s.stddev[c];
        for (std::size_t r = 0; r < m.rows(); ++r)
            out.at(r, c) = sd > 0.0 ? (m.at(r, c) - s.mean[c]) / sd : 0.0;
    }
    return {std::move(out), std::move(s)};
}

/// x' = (x - min) / (max - min) into [0,1]; constant columns map to 0;
/// transform-time values outside the fitted range are clipped.
inline std::pair<FeatureMatrix, ScalerStats> minmax_scale(const FeatureMatrix& m,
                                                          std::optional<ScalerStats> stats = {}) {
    ScalerStats s = stats ? *stats : fit_standard(m);
    if (s.min.size() != m.cols()) throw DataError("minmax_scale: stats width mismatch");
    FeatureMatrix out = m;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double range = s.max[c] - s.min[c];
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double x = range > 0.0 ? (m.at(r, c) - s.min[c]) / range : 0.0;
            out.at(r, c) = std::clamp(x, 0.0, 1.0);
        }
    }
    return {std::move(out), std::move(s)};
}

/// dev_t = |x_t - mean(x over the trailing window ending at t)|, computed per
/// stream. The first element's window holds only itself, so dev_1 = 0.
inline std::vector<double> rolling_deviation(const std::vector<double>& stream, std::size_t window) {
    if (window < 1) throw DataError("rolling_deviation: window must be >= 1");
    std::vector<double> out(stream.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        sum += stream[t];
        if (t >= window) sum -= stream[t - window];
        std::size_t count = std::min(t + 1, window);
        out[t] = std::abs(stream[t] - sum / static_cast<double>(count));
    }
    return out;
}

/// UTC hour of day [0,23] and day of week [0,6], day 0 = Monday.
inline std::pair<std::vector<double>, std::vector<double>> time_features(
    const std::vector<double>& timestamps) {
    std::vector<double> hour(timestamps.size()), dow(timestamps.size());
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        auto secs = static_cast<long long>(std::floor(timestamps[i]));
        auto mod = [](long long a, long long m) { return ((a % m) + m) % m; };
        hour[i] = static_cast<double>(mod(secs / 3600, 24));
        // 1970-01-01 was a Thursday; with Monday = 0, Thursday = 3.
        dow[i] = static_cast<double>(mod(secs / 86400 + 3, 7));
    }
    return {std::move(hour), std::move(dow)};
}

/// score(row) = sum over flag columns of |x - mean| / max(std, eps), with the
/// column statistics fitted on training rows.
struct TcpScoreStats {
    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> stddev;
};

inline TcpScoreStats fit_tcp_score(const FeatureMatrix& m, const std::vector<std::string>& flag_columns) {
    TcpScoreStats s;
    s.columns = flag_columns;
    for (const auto& name : flag_columns) {
        std::size_t c = m.column_index(name);  // throws naming the column
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) sum += m.at(r, c);
        double mean = m.rows() ? sum / static_cast<double>(m.rows()) : 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double d = m.at(r, c) - mean;
            sum2 += d * d;
        }
        s.mean.push_back(mean);
        s.stddev.push_back(m.rows() ? std::sqrt(sum2 / static_cast<double>(m.rows())) : 0.0);
    }
    return s;
}

inline std::vector<double> tcp_anomaly_score(const FeatureMatrix& m, const TcpScoreStats& stats) {
    constexpr double eps = 1e-9;
    std::vector<double> score(m.rows(), 0.0);
    for (std::size_t k = 0; k < stats.columns.size(); ++k) {
        std::size_t c = m.column_index(stats.columns[k]);
        double denom = std::max(stats.stddev[k], eps);
        for (std::size_t r = 0; r < m.rows(); ++r)
            score[r] += std::abs(m.at(r, c) - stats.mean[k]) / denom;
    }
    return score;
}

}  // namespace shield
