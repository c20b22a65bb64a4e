#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shield/datamodel.hpp"
#include "shield/eval.hpp"
#include "shield/featsel.hpp"
#include "shield/ingest.hpp"
#include "shield/preprocess.hpp"

namespace shield {

struct BuiltFeatures {
    FeatureMatrix X;  // engineered, imputed, unscaled
    std::vector<int> y;
};

/// Engineered device features: raw vitals (train-median imputed), per-stream
/// rolling deviations (HRD and the two BPD channels), time features, one-hot
/// sensor type. Stats are fitted on the given training rows only.
inline BuiltFeatures build_device_features(const std::vector<DeviceRecord>& records,
                                           const std::vector<std::size_t>& train_rows,
                                           std::size_t window = 10) {
    std::size_t n = records.size();
    FeatureMatrix base({"Temperature", "Systolic_BP", "Diastolic_BP", "Heart_Rate",
                        "Battery_Level", "Target_Blood_Pressure", "Target_Heart_Rate"},
                       n);
    auto put = [&](std::size_t r, std::size_t c, const std::optional<double>& v) {
        if (v) base.at(r, c) = *v;
        else base.set_missing(r, c);
    };
    for (std::size_t r = 0; r < n; ++r) {
        put(r, 0, records[r].temperature);
        put(r, 1, records[r].systolic_bp);
        put(r, 2, records[r].diastolic_bp);
        put(r, 3, records[r].heart_rate);
        put(r, 4, records[r].battery_level);
        put(r, 5, records[r].target_blood_pressure);
        put(r, 6, records[r].target_heart_rate);
    }
    auto medians = fit_medians(base.select_rows(train_rows));
    FeatureMatrix X = impute_median(base, medians);

    // Rolling deviations per (patient, sensor) stream; records arrive sorted.
    auto deviation_column = [&](const std::string& col) {
        std::size_t c = X.column_index(col);
        std::vector<double> out(n);
        std::size_t start = 0;
        while (start < n) {
            std::size_t end = start + 1;
            while (end < n && records[end].patient_id == records[start].patient_id &&
                   records[end].sensor_id == records[start].sensor_id)
                ++end;
            std::vector<double> stream;
            for (std::size_t r = start; r < end; ++r) stream.push_back(X.at(r, c));
            auto dev = rolling_deviation(stream, window);
            for (std::size_t r = start; r < end; ++r) out[r] = dev[r - start];
            start = end;
        }
        return out;
    };
    X.append_column("HRD", deviation_column("Heart_Rate"));
    X.append_column("BPD_Systolic", deviation_column("Systolic_BP"));
    X.append_column("BPD_Diastolic", deviation_column("Diastolic_BP"));

    std::vector<double> timestamps(n);
    for (std::size_t r = 0; r < n; ++r) timestamps[r] = records[r].timestamp;
    auto [hour, dow] = time_features(timestamps);
    X.append_column("Hour_Of_Day", hour);
    X.append_column("Day_Of_Week", dow);

    std::vector<std::string> types(n), train_types;
    for (std::size_t r = 0; r < n; ++r) types[r] = records[r].sensor_type;
    for (auto r : train_rows) train_types.push_back(records[r].sensor_type);
    auto enc = OneHotEncoder::fit("Sensor_Type", train_types);
    auto cols = enc.transform(types);
    auto names = enc.column_names();
    for (std::size_t c = 0; c < cols.size(); ++c) X.append_column(names[c], cols[c]);

    BuiltFeatures out;
    out.X = std::move(X);
    for (const auto& r : records) out.y.push_back(r.label);
    return out;
}

/// Engineered attack features: protocol numerics (train-median imputed),
/// derived string lengths, side-map columns verbatim, one-hot endpoints, and
/// the TCP anomaly score fitted on training rows.
inline BuiltFeatures build_attack_features(const std::vector<NetRecord>& records,
                                           const std::vector<std::size_t>& train_rows,
                                           bool use_tcp_score = true) {
    std::size_t n = records.size();
    std::vector<std::string> numeric_names = {
        "frame.time_delta", "frame.time_relative", "frame.len",
        "tcp.srcport",      "tcp.dstport",
        "tcp.flags.ack",    "tcp.flags.fin", "tcp.flags.push", "tcp.flags.reset",
        "tcp.flags.syn",    "mqtt.msgtype",  "mqtt.qos",       "mqtt.retain"};
    std::set<std::string> extra_names;
    for (const auto& r : records)
        for (const auto& [name, _] : r.extra) extra_names.insert(name);
    std::vector<std::string> all_names = numeric_names;
    for (const auto& name : extra_names) all_names.push_back(name);

    FeatureMatrix base(all_names, n);
    auto put = [&](std::size_t r, std::size_t c, const std::optional<double>& v) {
        if (v) base.at(r, c) = *v;
        else base.set_missing(r, c);
    };
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = records[r];
        put(r, 0, rec.frame_time_delta);
        put(r, 1, rec.frame_time_relative);
        put(r, 2, rec.frame_len);
        put(r, 3, rec.tcp_srcport);
        put(r, 4, rec.tcp_dstport);
        put(r, 5, rec.tcp_flags_ack);
        put(r, 6, rec.tcp_flags_fin);
        put(r, 7, rec.tcp_flags_push);
        put(r, 8, rec.tcp_flags_reset);
        put(r, 9, rec.tcp_flags_syn);
        put(r, 10, rec.mqtt_msgtype);
        put(r, 11, rec.mqtt_qos);
        put(r, 12, rec.mqtt_retain);
        std::size_t c = numeric_names.size();
        for (const auto& name : extra_names) {
            auto it = rec.extra.find(name);
            if (it != rec.extra.end()) base.at(r, c) = it->second;
            else base.set_missing(r, c);
            ++c;
        }
    }
    auto medians = fit_medians(base.select_rows(train_rows));
    FeatureMatrix X = impute_median(base, medians);

    for (const char* col : {"ip.src", "ip.dst"}) {
        std::vector<std::string> vals(n), train_vals;
        bool src = std::string(col) == "ip.src";
        for (std::size_t r = 0; r < n; ++r) vals[r] = src ? records[r].ip_src : records[r].ip_dst;
        for (auto r : train_rows) train_vals.push_back(src ? records[r].ip_src : records[r].ip_dst);
        auto enc = OneHotEncoder::fit(col, train_vals);
        auto cols = enc.transform(vals);
        auto names = enc.column_names();
        for (std::size_t c = 0; c < cols.size(); ++c) X.append_column(names[c], cols[c]);
    }

    if (use_tcp_score) {
        std::vector<std::string> flags = {"tcp.flags.ack", "tcp.flags.push", "tcp.flags.reset",
                                          "tcp.flags.syn"};
        auto stats = fit_tcp_score(X.select_rows(train_rows), flags);
        X.append_column("tcp_anomaly_score", tcp_anomaly_score(X, stats));
    }

    BuiltFeatures out;
    out.X = std::move(X);
    for (const auto& r : records) out.y.push_back(r.label);
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string task = "device";  // "device" | "cyber"
    std::string input_csv;        // exactly one of input_csv / generator
    bool use_generator = false;
    GenConfig gen;
    std::string label_column;  // empty = task default
    bool use_anova = true, use_mi = true, use_rfe = true;
    std::size_t anova_top_k = 0, mi_top_k = 0, rfe_top_k = 0;  // 0 = task default
    std::size_t mi_bins = 10;
    std::size_t window = 10;
    bool use_tcp_score = true;
    std::vector<std::string> models;  // empty = all six families
    std::string preset;               // "table3" | "table4"; empty = by task
    nlohmann::json detector_overrides = nlohmann::json::object();
    std::string out_dir = "out";
    std::uint64_t seed = 42;

    Task task_enum() const {
        if (task == "device") return Task::DEVICE;
        if (task == "cyber") return Task::CYBER;
        throw DataError("task must be 'device' or 'cyber'");
    }

    std::string effective_label_column() const {
        if (!label_column.empty()) return label_column;
        return task == "device" ? device_columns::default_label : attack_columns::default_label;
    }

    std::size_t default_top_k() const { return task == "device" ? 6 : 12; }

    void validate() const {
        task_enum();
        if (use_generator == !input_csv.empty())
            throw DataError("exactly one of input_csv or generator config must be set");
    }
};

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("task", cfg.task);
    get("input_csv", cfg.input_csv);
    get("label_column", cfg.label_column);
    get("use_anova", cfg.use_anova);
    get("use_mi", cfg.use_mi);
    get("use_rfe", cfg.use_rfe);
    get("anova_top_k", cfg.anova_top_k);
    get("mi_top_k", cfg.mi_top_k);
    get("rfe_top_k", cfg.rfe_top_k);
    get("mi_bins", cfg.mi_bins);
    get("window", cfg.window);
    get("use_tcp_score", cfg.use_tcp_score);
    get("models", cfg.models);
    get("preset", cfg.preset);
    get("out_dir", cfg.out_dir);
    get("seed", cfg.seed);
    if (j.contains("detectors")) cfg.detector_overrides = j.at("detectors");
    if (j.contains("generator")) {
        cfg.use_generator = true;
        const auto& g = j.at("generator");
        auto gget = [&](const char* key, auto& field) {
            if (g.contains(key)) field = g.at(key).get<std::decay_t<decltype(field)>>();
        };
        gget("n_records", cfg.gen.n_records);
        gget("anomaly_rate", cfg.gen.anomaly_rate);
        gget("n_patients", cfg.gen.n_patients);
        gget("n_sensors_per_patient", cfg.gen.n_sensors_per_patient);
        gget("device_weights", cfg.gen.device_weights);
        gget("attack_weights", cfg.gen.attack_weights);
        gget("start_time", cfg.gen.start_time);
        cfg.gen.seed = cfg.seed;
        gget("seed", cfg.gen.seed);
    }
    return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j = {{"task", cfg.task},
                        {"label_column", cfg.effective_label_column()},
                        {"use_anova", cfg.use_anova},
                        {"use_mi", cfg.use_mi},
                        {"use_rfe", cfg.use_rfe},
                        {"anova_top_k", cfg.anova_top_k},
                        {"mi_top_k", cfg.mi_top_k},
                        {"rfe_top_k", cfg.rfe_top_k},
                        {"mi_bins", cfg.mi_bins},
                        {"window", cfg.window},
                        {"use_tcp_score", cfg.use_tcp_score},
                        {"models", cfg.models},
                        {"preset", cfg.preset},
                        {"detectors", cfg.detector_overrides},
                        {"out_dir", cfg.out_dir},
                        {"seed", cfg.seed}};
    if (!cfg.input_csv.empty()) j["input_csv"] = cfg.input_csv;
    if (cfg.use_generator)
        j["generator"] = {{"n_records", cfg.gen.n_records},
                          {"anomaly_rate", cfg.gen.anomaly_rate},
                          {"n_patients", cfg.gen.n_patients},
                          {"n_sensors_per_patient", cfg.gen.n_sensors_per_patient},
                          {"device_weights", cfg.gen.device_weights},
                          {"attack_weights", cfg.gen.attack_weights},
                          {"start_time", cfg.gen.start_time},
                          {"seed", cfg.gen.seed}};
    return j;
}

inline DetectorSpec spec_for(const RunConfig& cfg, DetectorFamily family) {
    bool table4 = cfg.preset.empty() ? cfg.task == "cyber" : cfg.preset == "table4";
    DetectorSpec spec = table4 ? DetectorSpec::cyber_preset(family, cfg.seed)
                               : DetectorSpec::device_preset(family, cfg.seed);
    std::string name = family_name(family);
    if (cfg.detector_overrides.contains(name)) {
        const auto& o = cfg.detector_overrides.at(name);
        auto get = [&](const char* key, auto& field) {
            if (o.contains(key)) field = o.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("learning_rate", spec.learning_rate);
        get("max_depth", spec.max_depth);
        get("n_rounds", spec.n_rounds);
        get("l2_lambda", spec.l2_lambda);
        get("k", spec.k);
        get("distance", spec.distance);
        get("contamination", spec.contamination);
        get("n_trees", spec.n_trees);
        get("subsample", spec.subsample);
        get("nu", spec.nu);
        get("gamma", spec.gamma);
        get("max_train_rows", spec.max_train_rows);
        get("latent_dim", spec.latent_dim);
        get("epochs", spec.epochs);
        get("batch_size", spec.batch_size);
        get("hidden_width", spec.hidden_width);
        get("threshold_percentile", spec.threshold_percentile);
        get("seed", spec.seed);
    }
    return spec;
}

inline std::vector<DetectorSpec> specs_for(const RunConfig& cfg) {
    std::vector<DetectorFamily> families;
    if (cfg.models.empty()) {
        families = {DetectorFamily::GBDT,  DetectorFamily::KNN,
                    DetectorFamily::ISOFOREST, DetectorFamily::OCSVM,
                    DetectorFamily::AUTOENCODER, DetectorFamily::VAE};
    } else {
        for (const auto& name : cfg.models) families.push_back(family_from_name(name));
    }
    std::vector<DetectorSpec> specs;
    for (auto f : families) specs.push_back(spec_for(cfg, f));
    return specs;
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

/// Load or synthesize records and build the engineered feature matrix, with
/// the stat-fitting rows chosen by the task protocol.
inline BuiltFeatures load_features(const RunConfig& cfg, std::string* dataset_desc = nullptr) {
    cfg.validate();
    BuiltFeatures built;
    std::vector<int> labels;
    if (cfg.task == "device") {
        std::vector<DeviceRecord> records;
        if (cfg.use_generator) {
            records = generate_device_data(cfg.gen);
            if (dataset_desc) *dataset_desc = "synthetic-device";
        } else {
            records = parse_device_csv(cfg.input_csv, cfg.effective_label_column()).records;
            if (dataset_desc) *dataset_desc = cfg.input_csv;
        }
        for (const auto& r : records) labels.push_back(r.label);
        auto split = stratified_split(labels, 0.7, cfg.seed);
        built = build_device_features(records, split.train, cfg.window);
    } else {
        std::vector<NetRecord> records;
        if (cfg.use_generator) {
            records = generate_attack_data(cfg.gen);
            if (dataset_desc) *dataset_desc = "synthetic-attack";
        } else {
            records = parse_attack_csv(cfg.input_csv, cfg.effective_label_column()).records;
            if (dataset_desc) *dataset_desc = cfg.input_csv;
        }
        std::vector<std::size_t> all(records.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        built = build_attack_features(records, all, cfg.use_tcp_score);
    }
    return built;
}

struct SelectionResult {
    std::vector<FeatureScoreTable> tables;
    std::vector<std::string> selected;
};

/// Run the enabled selection methods on (standard-scaled) training rows and
/// integrate their top-k picks into the final feature subset.
inline SelectionResult select_features(const RunConfig& cfg, const BuiltFeatures& built) {
    std::vector<std::size_t> train_rows;
    if (cfg.task == "device") {
        train_rows = stratified_split(built.y, 0.7, cfg.seed).train;
    } else {
        train_rows.resize(built.X.rows());
        for (std::size_t i = 0; i < train_rows.size(); ++i) train_rows[i] = i;
    }
    FeatureMatrix X_train = built.X.select_rows(train_rows);
    std::vector<int> y_train;
    for (auto r : train_rows) y_train.push_back(built.y[r]);
    auto [X_std, stats] = standard_scale(X_train);

    SelectionResult out;
    if (cfg.use_anova) {
        auto t = anova_f(X_std, y_train);
        mark_top_k(t, cfg.anova_top_k ? cfg.anova_top_k : cfg.default_top_k());
        out.tables.push_back(std::move(t));
    }
    if (cfg.use_mi) {
        auto t = mutual_info(X_std, y_train, cfg.mi_bins);
        mark_top_k(t, cfg.mi_top_k ? cfg.mi_top_k : cfg.default_top_k());
        out.tables.push_back(std::move(t));
    }
    if (cfg.use_rfe) {
        std::size_t k = cfg.rfe_top_k ? cfg.rfe_top_k : cfg.default_top_k();
        out.tables.push_back(rfe_select(X_std, y_train, std::min(k, X_std.cols())));
    }
    if (out.tables.empty()) {
        // No method enabled: keep every feature.
        out.selected = built.X.column_names();
    } else {
        out.selected = union_select(out.tables);
    }
    return out;
}

struct BenchOutput {
    EvalReport report;
    SelectionResult selection;
    bool any_detector_error = false;
};

/// The full pipeline: ingest -> preprocess -> select -> fit -> evaluate.
inline BenchOutput run_pipeline(const RunConfig& cfg, const TimingHooks* hooks = nullptr) {
    std::string desc;
    BuiltFeatures built = load_features(cfg, &desc);
    SelectionResult sel = select_features(cfg, built);

    BenchInput input;
    input.X = built.X.select_columns(sel.selected);
    input.y = built.y;
    input.dataset_desc = desc + " (" + std::to_string(built.X.rows()) + " rows)";

    auto result = run_benchmark(cfg.task_enum(), input, specs_for(cfg), cfg.seed, hooks);
    BenchOutput out;
    out.report = std::move(result.report);
    out.report.config_echo = config_to_json(cfg).dump();
    out.selection = std::move(sel);
    for (const auto& row : out.report.rows)
        if (row.status.rfind("error:", 0) == 0) out.any_detector_error = true;
    return out;
}

}  // namespace shield
