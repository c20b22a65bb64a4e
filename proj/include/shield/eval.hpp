#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shield/csv.hpp"
#include "shield/datamodel.hpp"
#include "shield/detectors/model.hpp"
#include "shield/rng.hpp"

namespace shield {

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

/// Per class: seeded shuffle, then round(train_frac * n_class) rows to train.
inline SplitIndices stratified_split(const std::vector<int>& y, double train_frac,
                                     std::uint64_t seed) {
    std::vector<std::size_t> idx0, idx1;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 0 ? idx0 : idx1).push_back(i);
    if (idx0.size() < 2 || idx1.size() < 2)
        throw DataError("stratified_split: each class needs at least 2 rows");

    SplitIndices out;
    out.seed = seed;
    CounterRng rng(seed);
    int stream = 0;
    for (auto* cls : {&idx0, &idx1}) {
        CounterRng crng = rng.derive(static_cast<std::uint64_t>(stream++));
        crng.shuffle(*cls);
        auto n_train = static_cast<std::size_t>(
            std::llround(train_frac * static_cast<double>(cls->size())));
        for (std::size_t i = 0; i < cls->size(); ++i)
            (i < n_train ? out.train : out.test).push_back((*cls)[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

struct ConfusionMetrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> accuracy;
    std::optional<double> precision;  // undefined when TP+FP = 0
    std::optional<double> recall;     // undefined when TP+FN = 0
    std::optional<double> f1;         // undefined when either P or R is
};

inline ConfusionMetrics confusion_metrics(const std::vector<int>& y_true,
                                          const std::vector<int>& y_flag) {
    if (y_true.size() != y_flag.size()) throw DataError("confusion_metrics: length mismatch");
    ConfusionMetrics m;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1 && y_flag[i] == 1) ++m.tp;
        else if (y_true[i] == 0 && y_flag[i] == 1) ++m.fp;
        else if (y_true[i] == 1 && y_flag[i] == 0) ++m.fn;
        else ++m.tn;
    }
    auto n = static_cast<double>(y_true.size());
    if (n > 0) m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    return m;
}

/// Mann-Whitney AUC: the probability a random positive outranks a random
/// negative, ties counted half. Computed by the average-rank method, which
/// matches the pairwise definition exactly.
inline double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw DataError("roc_auc: length mismatch");
    std::size_t n = y_true.size();
    double n_pos = 0.0;
    for (int v : y_true) n_pos += static_cast<double>(v);
    double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw DataError("roc_auc: both classes must be present");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average rank
        for (std::size_t k = i; k < j; ++k)
            if (y_true[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

enum class Task { DEVICE, CYBER };

inline const char* task_name(Task t) { return t == Task::DEVICE ? "device" : "cyber"; }

struct BenchInput {
    FeatureMatrix X;  // selected, unscaled features
    std::vector<int> y;
    std::string dataset_desc;
};

/// Test hooks around the timed scoring section.
struct TimingHooks {
    std::function<void(const std::string& model)> before_scoring;
    std::function<void(const std::string& model)> after_scoring;
};

struct BenchResult {
    EvalReport report;
    std::vector<TrainedModel> models;  // in spec order, only successful fits
};

/// Runs the task protocol: DEVICE = stratified 70/30 split, metrics on the
/// test rows; CYBER = train on the full labeled set, metrics on the full set.
/// Only the scoring phase is timed (monotonic clock, median of 5 repeats).
inline BenchResult run_benchmark(Task task, const BenchInput& input,
                                 const std::vector<DetectorSpec>& specs, std::uint64_t seed,
                                 const TimingHooks* hooks = nullptr) {
    const std::string protocol = task == Task::DEVICE ? "split" : "full";

    std::vector<std::size_t> train_rows, eval_rows;
    if (task == Task::DEVICE) {
        auto split = stratified_split(input.y, 0.7, seed);
        train_rows = split.train;
        eval_rows = split.test;
    } else {
        train_rows.resize(input.X.rows());
        for (std::size_t i = 0; i < train_rows.size(); ++i) train_rows[i] = i;
        eval_rows = train_rows;
    }

    FeatureMatrix X_train_raw = input.X.select_rows(train_rows);
    FeatureMatrix X_eval_raw = input.X.select_rows(eval_rows);
    std::vector<int> y_train, y_eval;
    for (auto r : train_rows) y_train.push_back(input.y[r]);
    for (auto r : eval_rows) y_eval.push_back(input.y[r]);

    // Traditional models consume standard-scaled features, the neural models
    // minmax-scaled; both scalers are fitted on training rows only.
    auto [X_train_std, std_stats] = standard_scale(X_train_raw);
    auto [X_eval_std, std_stats2] = standard_scale(X_eval_raw, std_stats);
    auto [X_train_mm, mm_stats] = minmax_scale(X_train_raw);
    auto [X_eval_mm, mm_stats2] = minmax_scale(X_eval_raw, mm_stats);

    BenchResult result;
    result.report.task = task_name(task);
    result.report.dataset = input.dataset_desc;
    result.report.seed = seed;

    for (const auto& base_spec : specs) {
        DetectorSpec spec = base_spec;
        bool neural = spec.family == DetectorFamily::AUTOENCODER ||
                      spec.family == DetectorFamily::VAE;
        const FeatureMatrix& X_train = neural ? X_train_mm : X_train_std;
        const FeatureMatrix& X_eval = neural ? X_eval_mm : X_eval_std;
        const ScalerStats& scaler = neural ? mm_stats : std_stats;

        EvalRow row;
        row.model = family_name(spec.family);
        row.protocol = protocol;
        try {
            TrainedModel model = fit_detector(spec, X_train, y_train, scaler);

            if (hooks && hooks->before_scoring) hooks->before_scoring(row.model);
            std::vector<double> scores;
            std::vector<double> times;
            for (int rep = 0; rep < 5; ++rep) {
                auto t0 = std::chrono::steady_clock::now();
                scores = score_detector(model, X_eval);
                auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            if (hooks && hooks->after_scoring) hooks->after_scoring(row.model);
            std::sort(times.begin(), times.end());
            row.detect_seconds = std::max(times[2], 1e-9);  // median; clocks can quantize to 0

            auto flags = flag_detector(model, scores);
            auto cm = confusion_metrics(y_eval, flags);
            row.accuracy = cm.accuracy;
            row.precision = cm.precision;
            row.recall = cm.recall;
            row.f1 = cm.f1;
            row.roc_auc = roc_auc(y_eval, scores);
            row.status = "ok";
            result.models.push_back(std::move(model));
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        result.report.rows.push_back(std::move(row));
    }
    for (const auto& name : reserved_model_names()) {
        EvalRow row;
        row.model = name;
        row.protocol = protocol;
        row.status = "not implemented";
        result.report.rows.push_back(std::move(row));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace report_detail {

using nlohmann::json;

inline json opt(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

inline std::optional<double> opt_from(const json& j) {
    return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

}  // namespace report_detail

inline nlohmann::json report_to_json(const EvalReport& r) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"model", row.model},
                        {"protocol", row.protocol},
                        {"accuracy", report_detail::opt(row.accuracy)},
                        {"precision", report_detail::opt(row.precision)},
                        {"recall", report_detail::opt(row.recall)},
                        {"f1", report_detail::opt(row.f1)},
                        {"roc_auc", report_detail::opt(row.roc_auc)},
                        {"detect_seconds", report_detail::opt(row.detect_seconds)},
                        {"status", row.status}});
    return {{"schema_version", r.schema_version},
            {"task", r.task},
            {"dataset", r.dataset},
            {"seed", r.seed},
            {"config", r.config_echo},
            {"rows", rows}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.schema_version = j.at("schema_version").get<int>();
    r.task = j.at("task").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_echo = j.at("config").get<std::string>();
    for (const auto& rj : j.at("rows")) {
        EvalRow row;
        row.model = rj.at("model").get<std::string>();
        row.protocol = rj.at("protocol").get<std::string>();
        row.accuracy = report_detail::opt_from(rj.at("accuracy"));
        row.precision = report_detail::opt_from(rj.at("precision"));
        row.recall = report_detail::opt_from(rj.at("recall"));
        row.f1 = report_detail::opt_from(rj.at("f1"));
        row.roc_auc = report_detail::opt_from(rj.at("roc_auc"));
        row.detect_seconds = report_detail::opt_from(rj.at("detect_seconds"));
        row.status = rj.at("status").get<std::string>();
        r.rows.push_back(std::move(row));
    }
    return r;
}

/// Canonical JSON: nlohmann objects keep keys sorted, so equal reports dump
/// to identical bytes.
inline void write_report_json(const EvalReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << report_to_json(r).dump(2) << '\n';
}

inline void write_report_csv(const EvalReport& r, const std::string& path) {
    csv::Table t;
    t.header = {"model",  "protocol", "accuracy",       "precision", "recall",
                "f1",     "roc_auc",  "detect_seconds", "status"};
    auto fmt = [](const std::optional<double>& v) {
        return v ? csv::format_double(*v) : std::string();
    };
    for (const auto& row : r.rows)
        t.rows.push_back({row.model, row.protocol, fmt(row.accuracy), fmt(row.precision),
                          fmt(row.recall), fmt(row.f1), fmt(row.roc_auc),
                          fmt(row.detect_seconds), row.status});
    csv::write_file(path, t);
}

// ---------------------------------------------------------------------------
// SVG charts (stand-ins for the per-metric figures)
// ---------------------------------------------------------------------------

namespace svg_detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 70;

inline void open_svg(std::ostream& os, const std::string& title) {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(title) << "</text>\n";
}

inline void axes(std::ostream& os) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
       << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
       << "\" stroke=\"black\"/>\n<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\""
       << kLeft << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
}

}  // namespace svg_detail

/// One bar per model with a defined value for the metric; y axis fixed to
/// [0, 1] for ratio metrics, or data-driven for timings.
inline void write_metric_bar_svg(const EvalReport& r, const std::string& metric,
                                 const std::string& path) {
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& row : r.rows) {
        std::optional<double> v;
        if (metric == "accuracy") v = row.accuracy;
        else if (metric == "precision") v = row.precision;
        else if (metric == "recall") v = row.recall;
        else if (metric == "f1") v = row.f1;
        else if (metric == "roc_auc") v = row.roc_auc;
        else throw DataError("unknown metric: " + metric);
        if (v) bars.emplace_back(row.model, *v);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    using namespace svg_detail;
    open_svg(out, r.task + ": " + metric);
    axes(out);
    double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        double h = bars[i].second * plot_h;
        double x = kLeft + slot * (static_cast<double>(i) + 0.2);
        out << "<rect x=\"" << x << "\" y=\"" << kHeight - kBottom - h << "\" width=\""
            << slot * 0.6 << "\" height=\"" << h << "\" fill=\"steelblue\"/>\n";
        out << "<text x=\"" << x + slot * 0.3 << "\" y=\"" << kHeight - kBottom + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(bars[i].first)
            << "</text>\n";
    }
    for (int tick = 0; tick <= 5; ++tick) {
        double v = tick / 5.0;
        double y = kHeight - kBottom - v * plot_h;
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << v << "</text>\n";
    }
    out << "</svg>\n";
}

/// Detection-cost bars on a log-scaled axis. The axis spans at least one
/// decade so it never degenerates even when all costs coincide.
inline void write_cost_log_svg(const EvalReport& r, const std::string& path) {
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& row : r.rows)
        if (row.detect_seconds) bars.emplace_back(row.model, std::max(*row.detect_seconds, 1e-9));
    double lo = 1e-3, hi = 1e0;
    if (!bars.empty()) {
        lo = hi = bars.front().second;
        for (const auto& [_, v] : bars) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    double log_lo = std::floor(std::log10(lo)) - 1.0;
    double log_hi = std::ceil(std::log10(hi));
    if (log_hi - log_lo < 1.0) log_hi = log_lo + 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    using namespace svg_detail;
    open_svg(out, r.task + ": detection cost (log scale, seconds)");
    axes(out);
    double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        double frac = (std::log10(bars[i].second) - log_lo) / (log_hi - log_lo);
        double h = std::clamp(frac, 0.0, 1.0) * plot_h;
        double x = kLeft + slot * (static_cast<double>(i) + 0.2);
        out << "<rect x=\"" << x << "\" y=\"" << kHeight - kBottom - h << "\" width=\""
            << slot * 0.6 << "\" height=\"" << h << "\" fill=\"indianred\"/>\n";
        out << "<text x=\"" << x + slot * 0.3 << "\" y=\"" << kHeight - kBottom + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(bars[i].first)
            << "</text>\n";
    }
    for (double e = log_lo; e <= log_hi + 1e-9; e += 1.0) {
        double y = kHeight - kBottom - (e - log_lo) / (log_hi - log_lo) * plot_h;
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << static_cast<int>(e) << "</text>\n";
    }
    out << "</svg>\n";
}

/// F1 vs detection cost scatter, cost on a log axis.
inline void write_f1_vs_cost_svg(const EvalReport& r, const std::string& path) {
    std::vector<std::tuple<std::string, double, double>> pts;  // model, cost, f1
    for (const auto& row : r.rows)
        if (row.f1 && row.detect_seconds)
            pts.emplace_back(row.model, std::max(*row.detect_seconds, 1e-9), *row.f1);
    double lo = 1e-3, hi = 1e0;
    if (!pts.empty()) {
        lo = hi = std::get<1>(pts.front());
        for (const auto& [_, c, __] : pts) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
    }
    double log_lo = std::floor(std::log10(lo)) - 0.5;
    double log_hi = std::ceil(std::log10(hi)) + 0.5;
    if (log_hi - log_lo < 1.0) log_hi = log_lo + 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    using namespace svg_detail;
    open_svg(out, r.task + ": F1 vs detection cost");
    axes(out);
    double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    for (const auto& [name, cost, f1] : pts) {
        double x = kLeft + (std::log10(cost) - log_lo) / (log_hi - log_lo) * plot_w;
        double y = kHeight - kBottom - f1 * plot_h;
        out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"5\" fill=\"seagreen\"/>\n";
        out << "<text x=\"" << x + 8 << "\" y=\"" << y + 4 << "\" font-size=\"11\">"
            << escape(name) << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20
        << "\" text-anchor=\"middle\" font-size=\"12\">detection seconds (log)</text>\n";
    out << "</svg>\n";
}

/// JSON + CSV + the SVG chart set into the given directory.
inline void emit_report(const EvalReport& r, const std::string& out_dir) {
    write_report_json(r, out_dir + "/report.json");
    write_report_csv(r, out_dir + "/report.csv");
    for (const char* m : {"accuracy", "precision", "recall", "f1", "roc_auc"})
        write_metric_bar_svg(r, m, out_dir + "/metric_" + m + ".svg");
    write_cost_log_svg(r, out_dir + "/cost_log.svg");
    write_f1_vs_cost_svg(r, out_dir + "/f1_vs_cost.svg");
}

}  // namespace shield
