#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shield {

/// Input file or schema problem (missing column, empty file, bad cell).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header does not match the expected schema.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// A detector failed to fit or converge.
class DetectorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One timestamped vital-signs reading from a patient-monitoring sensor.
/// Numeric fields are optional so that missingness stays explicit until
/// imputation.
struct DeviceRecord {
    std::string patient_id;
    double timestamp = 0.0;  // seconds since epoch
    std::string sensor_id;
    std::string sensor_type;
    std::optional<double> temperature;    // deg C
    std::optional<double> systolic_bp;    // mmHg
    std::optional<double> diastolic_bp;   // mmHg
    std::optional<double> heart_rate;     // bpm
    std::optional<double> battery_level;  // percent, [0, 100]
    std::optional<double> target_blood_pressure;
    std::optional<double> target_heart_rate;
    std::string target_health_status;
    int label = 0;  // 0 = normal, 1 = faulty

    void validate() const {
        if (battery_level && (*battery_level < 0.0 || *battery_level > 100.0))
            throw DataError("battery_level out of [0,100]: " + std::to_string(*battery_level));
        if (label != 0 && label != 1)
            throw DataError("label must be 0 or 1, got " + std::to_string(label));
    }

    bool operator==(const DeviceRecord&) const = default;
};

/// One network-traffic observation with TCP/MQTT protocol fields.
/// Columns outside the fixed schema land in `extra` verbatim so upstream
/// datasets with additional numeric features ingest without schema changes.
struct NetRecord {
    std::optional<double> frame_time_delta;     // seconds, >= 0
    std::optional<double> frame_time_relative;  // seconds
    std::optional<double> frame_len;            // bytes, >= 0
    std::string ip_src;
    std::string ip_dst;
    std::optional<double> tcp_srcport;
    std::optional<double> tcp_dstport;
    std::optional<double> tcp_flags_ack;
    std::optional<double> tcp_flags_fin;
    std::optional<double> tcp_flags_push;
    std::optional<double> tcp_flags_reset;
    std::optional<double> tcp_flags_syn;
    std::optional<double> mqtt_msgtype;
    std::optional<double> mqtt_qos;  // {0,1,2}
    std::optional<double> mqtt_retain;
    std::string mqtt_topic;
    std::string mqtt_clientid;
    std::map<std::string, double> extra;  // unknown numeric columns, by source name
    int label = 0;                        // 0 = normal, 1 = attack

    void validate() const {
        auto check_flag = [](const std::optional<double>& v, const char* name) {
            if (v && *v != 0.0 && *v != 1.0)
                throw DataError(std::string(name) + " must be 0 or 1, got " + std::to_string(*v));
        };
        check_flag(tcp_flags_ack, "tcp.flags.ack");
        check_flag(tcp_flags_fin, "tcp.flags.fin");
        check_flag(tcp_flags_push, "tcp.flags.push");
        check_flag(tcp_flags_reset, "tcp.flags.reset");
        check_flag(tcp_flags_syn, "tcp.flags.syn");
        if (frame_len && *frame_len < 0.0) throw DataError("frame.len must be >= 0");
        if (frame_time_delta && *frame_time_delta < 0.0)
            throw DataError("frame.time_delta must be >= 0");
        if (mqtt_qos && *mqtt_qos != 0.0 && *mqtt_qos != 1.0 && *mqtt_qos != 2.0)
            throw DataError("mqtt.qos must be in {0,1,2}");
        if (label != 0 && label != 1)
            throw DataError("label must be 0 or 1, got " + std::to_string(label));
    }

    bool operator==(const NetRecord&) const = default;
};

/// Dense named-column numeric matrix; the common currency of the pipeline.
/// Missing cells are tracked in an explicit mask, never as sentinel values.
/// Labels are deliberately carried outside this type.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    explicit FeatureMatrix(std::vector<std::string> names, std::size_t n_rows = 0)
        : names_(std::move(names)), rows_(n_rows), cols_(names_.size()) {
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j])
                    throw DataError("duplicate column name: " + names_[i]);
        data_.assign(rows_ * cols_, 0.0);
        missing_.assign(rows_ * cols_, 0);
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<std::string>& column_names() const { return names_; }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t c = 0; c < names_.size(); ++c)
            if (names_[c] == name) return c;
        throw DataError("no such column: " + name);
    }

    bool has_column(const std::string& name) const {
        for (const auto& n : names_)
            if (n == name) return true;
        return false;
    }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    void set_missing(std::size_t r, std::size_t c, bool m = true) { missing_[r * cols_ + c] = m ? 1 : 0; }
    bool is_missing(std::size_t r, std::size_t c) const { return missing_[r * cols_ + c] != 0; }

    bool any_missing() const {
        for (auto m : missing_)
            if (m) return true;
        return false;
    }

    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }

    std::vector<double> column(const std::string& name) const {
        std::size_t c = column_index(name);
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
        return out;
    }

    void append_column(const std::string& name, const std::vector<double>& values) {
        if (values.size() != rows_ && !(rows_ == 0 && cols_ == 0))
            throw DataError("append_column: row count mismatch for " + name);
        if (has_column(name)) throw DataError("duplicate column name: " + name);
        if (cols_ == 0 && rows_ == 0) rows_ = values.size();
        std::vector<double> data(rows_ * (cols_ + 1));
        std::vector<std::uint8_t> missing(rows_ * (cols_ + 1), 0);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                data[r * (cols_ + 1) + c] = at(r, c);
                missing[r * (cols_ + 1) + c] = missing_[r * cols_ + c];
            }
            data[r * (cols_ + 1) + cols_] = values[r];
        }
        names_.push_back(name);
        ++cols_;
        data_ = std::move(data);
        missing_ = std::move(missing);
    }

    /// New matrix with the given columns, in the given order.
    FeatureMatrix select_columns(const std::vector<std::string>& names) const {
        FeatureMatrix out(names, rows_);
        for (std::size_t k = 0; k < names.size(); ++k) {
            std::size_t c = column_index(names[k]);
            for (std::size_t r = 0; r < rows_; ++r) {
                out.at(r, k) = at(r, c);
                out.set_missing(r, k, is_missing(r, c));
            }
        }
        return out;
    }

    /// New matrix with the given rows, in the given order.
    FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const {
        FeatureMatrix out(names_, idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            for (std::size_t c = 0; c < cols_; ++c) {
                out.at(k, c) = at(idx[k], c);
                out.set_missing(k, c, is_missing(idx[k], c));
            }
        }
        return out;
    }

private:
    std::vector<std::string> names_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;            // row-major
    std::vector<std::uint8_t> missing_;
};

enum class DetectorFamily { GBDT, KNN, ISOFOREST, OCSVM, AUTOENCODER, VAE };

inline const char* family_name(DetectorFamily f) {
    switch (f) {
        case DetectorFamily::GBDT: return "gbdt";
        case DetectorFamily::KNN: return "knn";
        case DetectorFamily::ISOFOREST: return "isoforest";
        case DetectorFamily::OCSVM: return "ocsvm";
        case DetectorFamily::AUTOENCODER: return "autoencoder";
        case DetectorFamily::VAE: return "vae";
    }
    return "?";
}

inline DetectorFamily family_from_name(const std::string& s) {
    if (s == "gbdt") return DetectorFamily::GBDT;
    if (s == "knn") return DetectorFamily::KNN;
    if (s == "isoforest") return DetectorFamily::ISOFOREST;
    if (s == "ocsvm") return DetectorFamily::OCSVM;
    if (s == "autoencoder") return DetectorFamily::AUTOENCODER;
    if (s == "vae") return DetectorFamily::VAE;
    throw DataError("unknown detector family: " + s);
}

/// Paper-table models that the engine does not train; benchmark reports
/// carry them as "not implemented" rows so comparisons stay explicit.
inline const std::vector<std::string>& reserved_model_names() {
    static const std::vector<std::string> names = {"gan", "gnn", "lstm_autoencoder"};
    return names;
}

/// Declarative hyperparameter bundle. Each family reads only the fields
/// relevant to it; the rest are ignored.
struct DetectorSpec {
    DetectorFamily family = DetectorFamily::GBDT;
    // GBDT
    double learning_rate = 0.1;
    int max_depth = 6;
    int n_rounds = 100;
    double l2_lambda = 1.0;
    // KNN
    int k = 5;
    std::string distance = "euclidean";
    // Isolation Forest
    double contamination = 0.2;
    int n_trees = 100;
    int subsample = 256;
    // One-Class SVM
    double nu = 0.2;
    double gamma = 0.1;
    int max_train_rows = 2000;  // 0 = no cap; seeded subsample above the cap
    // Autoencoder / VAE
    int latent_dim = 2;
    int epochs = 100;
    int batch_size = 32;
    int hidden_width = 16;
    // Shared
    double threshold_percentile = 80.0;
    std::uint64_t seed = 0;

    /// Faulty-device preset.
    static DetectorSpec device_preset(DetectorFamily f, std::uint64_t seed) {
        DetectorSpec s;
        s.family = f;
        s.seed = seed;
        s.contamination = 0.2;
        s.nu = 0.2;
        s.latent_dim = 2;
        s.epochs = 100;
        return s;
    }

    /// Cyberattack preset.
    static DetectorSpec cyber_preset(DetectorFamily f, std::uint64_t seed) {
        DetectorSpec s;
        s.family = f;
        s.seed = seed;
        s.contamination = 0.1;
        s.nu = 0.1;
        s.latent_dim = 10;
        s.epochs = 200;
        return s;
    }
};

/// One benchmark row. Metrics are optional: a zero denominator (e.g. no
/// positive predictions) yields an absent value, serialized as null.
struct EvalRow {
    std::string model;
    std::string protocol;  // "split" or "full"
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> roc_auc;
    std::optional<double> detect_seconds;
    std::string status;  // "ok", "not implemented", or "error: ..."
};

struct EvalReport {
    int schema_version = 1;
    std::string task;     // "device" or "cyber"
    std::string dataset;  // descriptor of the evaluated data
    std::uint64_t seed = 0;
    std::string config_echo;  // JSON text of the run configuration
    std::vector<EvalRow> rows;
};

}  // namespace shield
