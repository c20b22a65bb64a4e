#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shield/csv.hpp"
#include "shield/datamodel.hpp"
#include "shield/rng.hpp"

namespace shield {

// Canonical column spellings for the two CSV schemas.
namespace device_columns {
inline const std::vector<std::string> required = {
    "Patient_ID",    "Timestamp",    "Sensor_ID",     "Sensor_Type",
    "Temperature",   "Systolic_BP",  "Diastolic_BP",  "Heart_Rate",
    "Battery_Level", "Target_Blood_Pressure", "Target_Heart_Rate", "Target_Health_Status"};
inline const std::string default_label = "Label";
}  // namespace device_columns

namespace attack_columns {
inline const std::vector<std::string> required = {
    "frame.time_delta", "frame.time_relative", "frame.len",
    "ip.src",           "ip.dst",
    "tcp.srcport",      "tcp.dstport",
    "tcp.flags.ack",    "tcp.flags.fin", "tcp.flags.push", "tcp.flags.reset", "tcp.flags.syn",
    "mqtt.msgtype",     "mqtt.qos",      "mqtt.retain",    "mqtt.topic",     "mqtt.clientid"};
inline const std::string default_label = "label";
}  // namespace attack_columns

template <typename RecordT>
struct ParseResult {
    std::vector<RecordT> records;
    std::size_t missing_cells = 0;  // unparseable or blank numeric cells
};

namespace detail {

inline std::size_t require_column(const csv::Table& t, const std::string& name) {
    auto idx = t.find(name);
    if (!idx) throw SchemaError("missing required column: " + name);
    return *idx;
}

inline std::optional<double> numeric_cell(const std::vector<std::string>& row, std::size_t col,
                                          std::size_t& missing_count) {
    auto v = csv::parse_double(row[col]);
    if (!v) ++missing_count;
    return v;
}

inline int label_cell(const std::vector<std::string>& row, std::size_t col) {
    auto v = csv::parse_double(row[col]);
    if (!v || (*v != 0.0 && *v != 1.0))
        throw DataError("label cell must be 0 or 1, got '" + row[col] + "'");
    return static_cast<int>(*v);
}

}  // namespace detail

/// Parse a medical-device CSV. Unparseable numeric cells become missing and
/// are counted; rows come back sorted by (patient_id, sensor_id, timestamp).
inline ParseResult<DeviceRecord> parse_device_csv(const std::string& path,
                                                  const std::string& label_column =
                                                      device_columns::default_label) {
    csv::Table t = csv::read_file(path);
    for (const auto& name : device_columns::required) detail::require_column(t, name);
    std::size_t c_pid = *t.find("Patient_ID"), c_ts = *t.find("Timestamp");
    std::size_t c_sid = *t.find("Sensor_ID"), c_stype = *t.find("Sensor_Type");
    std::size_t c_temp = *t.find("Temperature"), c_sys = *t.find("Systolic_BP");
    std::size_t c_dia = *t.find("Diastolic_BP"), c_hr = *t.find("Heart_Rate");
    std::size_t c_bat = *t.find("Battery_Level"), c_tbp = *t.find("Target_Blood_Pressure");
    std::size_t c_thr = *t.find("Target_Heart_Rate"), c_ths = *t.find("Target_Health_Status");
    std::size_t c_label = detail::require_column(t, label_column);

    ParseResult<DeviceRecord> out;
    for (const auto& row : t.rows) {
        DeviceRecord r;
        r.patient_id = row[c_pid];
        auto ts = csv::parse_double(row[c_ts]);
        if (!ts) throw DataError("unparseable Timestamp cell: '" + row[c_ts] + "'");
        r.timestamp = *ts;
        r.sensor_id = row[c_sid];
        r.sensor_type = row[c_stype];
        r.temperature = detail::numeric_cell(row, c_temp, out.missing_cells);
        r.systolic_bp = detail::numeric_cell(row, c_sys, out.missing_cells);
        r.diastolic_bp = detail::numeric_cell(row, c_dia, out.missing_cells);
        r.heart_rate = detail::numeric_cell(row, c_hr, out.missing_cells);
        r.battery_level = detail::numeric_cell(row, c_bat, out.missing_cells);
        r.target_blood_pressure = detail::numeric_cell(row, c_tbp, out.missing_cells);
        r.target_heart_rate = detail::numeric_cell(row, c_thr, out.missing_cells);
        r.target_health_status = row[c_ths];
        r.label = detail::label_cell(row, c_label);
        r.validate();
        out.records.push_back(std::move(r));
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const DeviceRecord& a, const DeviceRecord& b) {
                         if (a.patient_id != b.patient_id) return a.patient_id < b.patient_id;
                         if (a.sensor_id != b.sensor_id) return a.sensor_id < b.sensor_id;
                         return a.timestamp < b.timestamp;
                     });
    return out;
}

/// Parse an attack-traffic CSV. Unknown numeric columns land in the record's
/// side-map verbatim; mqtt.topic and mqtt.clientid additionally yield derived
/// length features in the side-map.
inline ParseResult<NetRecord> parse_attack_csv(const std::string& path,
                                               const std::string& label_column =
                                                   attack_columns::default_label) {
    csv::Table t = csv::read_file(path);
    for (const auto& name : attack_columns::required) detail::require_column(t, name);
    std::size_t c_label = detail::require_column(t, label_column);

    std::vector<std::size_t> known(t.header.size(), 0);
    for (const auto& name : attack_columns::required) known[*t.find(name)] = 1;
    known[c_label] = 1;

    auto col = [&](const char* name) { return *t.find(name); };
    std::size_t c_ftd = col("frame.time_delta"), c_ftr = col("frame.time_relative");
    std::size_t c_flen = col("frame.len"), c_src = col("ip.src"), c_dst = col("ip.dst");
    std::size_t c_sport = col("tcp.srcport"), c_dport = col("tcp.dstport");
    std::size_t c_ack = col("tcp.flags.ack"), c_fin = col("tcp.flags.fin");
    std::size_t c_push = col("tcp.flags.push"), c_rst = col("tcp.flags.reset");
    std::size_t c_syn = col("tcp.flags.syn"), c_mtype = col("mqtt.msgtype");
    std::size_t c_qos = col("mqtt.qos"), c_ret = col("mqtt.retain");
    std::size_t c_topic = col("mqtt.topic"), c_cid = col("mqtt.clientid");

    ParseResult<NetRecord> out;
    for (const auto& row : t.rows) {
        NetRecord r;
        r.frame_time_delta = detail::numeric_cell(row, c_ftd, out.missing_cells);
        r.frame_time_relative = detail::numeric_cell(row, c_ftr, out.missing_cells);
        r.frame_len = detail::numeric_cell(row, c_flen, out.missing_cells);
        r.ip_src = row[c_src];
        r.ip_dst = row[c_dst];
        r.tcp_srcport = detail::numeric_cell(row, c_sport, out.missing_cells);
        r.tcp_dstport = detail::numeric_cell(row, c_dport, out.missing_cells);
        r.tcp_flags_ack = detail::numeric_cell(row, c_ack, out.missing_cells);
        r.tcp_flags_fin = detail::numeric_cell(row, c_fin, out.missing_cells);
        r.tcp_flags_push = detail::numeric_cell(row, c_push, out.missing_cells);
        r.tcp_flags_reset = detail::numeric_cell(row, c_rst, out.missing_cells);
        r.tcp_flags_syn = detail::numeric_cell(row, c_syn, out.missing_cells);
        r.mqtt_msgtype = detail::numeric_cell(row, c_mtype, out.missing_cells);
        r.mqtt_qos = detail::numeric_cell(row, c_qos, out.missing_cells);
        r.mqtt_retain = detail::numeric_cell(row, c_ret, out.missing_cells);
        r.mqtt_topic = row[c_topic];
        r.mqtt_clientid = row[c_cid];
        r.label = detail::label_cell(row, c_label);
        r.extra["mqtt.topic_len"] = static_cast<double>(r.mqtt_topic.size());
        r.extra["mqtt.clientid_len"] = static_cast<double>(r.mqtt_clientid.size());
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (known[c]) continue;
            auto v = csv::parse_double(row[c]);
            if (v) r.extra[t.header[c]] = *v;
            else ++out.missing_cells;
        }
        r.validate();
        out.records.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

enum class DeviceFault { TEMP_SPIKE, BATTERY_COLLAPSE, FROZEN_READING, EXTREME_VALUE };
enum class AttackKind { SYN_BURST, RESET_STORM, MQTT_EXPLOIT };

/// Clinically plausible defaults for normal vitals; the paper's dataset
/// publishes no distributions, so these are documented constants.
struct VitalsBaseline {
    double temp_mean = 36.8, temp_sd = 0.4;        // deg C
    double hr_mean = 75.0, hr_sd = 8.0;            // bpm
    double sys_mean = 120.0, sys_sd = 10.0;        // mmHg
    double dia_mean = 80.0, dia_sd = 7.0;          // mmHg
    double battery_start = 100.0, battery_end = 20.0;  // linear drain per stream
};

struct GenConfig {
    std::size_t n_records = 10000;
    double anomaly_rate = 0.2;  // (0, 0.5]
    std::size_t n_patients = 2;
    std::size_t n_sensors_per_patient = 9;
    // Scenario mix weights, indexed by DeviceFault / AttackKind.
    // Frozen readings are rare by default: a single repeated sample is nearly
    // indistinguishable from a normal one, so they mostly bound achievable recall.
    std::vector<double> device_weights = {0.35, 0.30, 0.05, 0.30};
    std::vector<double> attack_weights = {0.40, 0.30, 0.30};
    VitalsBaseline baseline;
    double start_time = 1704067200.0;  // 2024-01-01 00:00:00 UTC
    std::uint64_t seed = 0;

    void validate() const {
        if (!(anomaly_rate > 0.0 && anomaly_rate <= 0.5))
            throw DataError("anomaly_rate must be in (0, 0.5]");
        if (n_records == 0) throw DataError("n_records must be > 0");
        if (n_patients == 0 || n_sensors_per_patient == 0)
            throw DataError("n_patients and n_sensors_per_patient must be > 0");
        auto check = [](const std::vector<double>& w, const char* what) {
            double sum = 0.0;
            for (double x : w) {
                if (x < 0.0) throw DataError(std::string(what) + " weights must be non-negative");
                sum += x;
            }
            if (sum <= 0.0) throw DataError(std::string(what) + " weights must not all be zero");
        };
        check(device_weights, "device");
        check(attack_weights, "attack");
    }
};

namespace detail {

/// Exactly round(rate * n) anomalous indices, chosen by a seeded shuffle.
inline std::vector<std::uint8_t> pick_anomalies(std::size_t n, double rate, CounterRng rng) {
    auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<std::uint8_t> flags(n, 0);
    for (std::size_t i = 0; i < k; ++i) flags[idx[i]] = 1;
    return flags;
}

inline std::size_t pick_weighted(const std::vector<double>& weights, CounterRng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace detail

/// Deterministic synthetic device telemetry. Normal readings follow
/// per-patient baselines with slow linear battery drain; each faulty record
/// realizes exactly one fault kind from the configured mix.
inline std::vector<DeviceRecord> generate_device_data(const GenConfig& cfg) {
    cfg.validate();
    CounterRng master(cfg.seed);
    auto anomalous = detail::pick_anomalies(cfg.n_records, cfg.anomaly_rate, master.derive(1));
    CounterRng kind_rng = master.derive(2);

    static const char* sensor_types[] = {"ECG",         "SpO2",    "Temperature",
                                         "BloodPressure", "HeartRate", "Respiration",
                                         "Glucose",     "EEG",     "Motion"};
    std::size_t n_streams = cfg.n_patients * cfg.n_sensors_per_patient;
    std::size_t per_stream = (cfg.n_records + n_streams - 1) / n_streams;

    // Per-patient baseline offsets so patients are distinguishable.
    std::vector<VitalsBaseline> patient_base(cfg.n_patients, cfg.baseline);
    for (std::size_t p = 0; p < cfg.n_patients; ++p) {
        CounterRng prng = master.derive(100 + p);
        patient_base[p].temp_mean += prng.gaussian(0.0, 0.1);
        patient_base[p].hr_mean += prng.gaussian(0.0, 2.0);
        patient_base[p].sys_mean += prng.gaussian(0.0, 3.0);
        patient_base[p].dia_mean += prng.gaussian(0.0, 2.0);
    }

    std::vector<DeviceRecord> out(cfg.n_records);
    std::vector<DeviceRecord> prev(n_streams);   // last emitted record per stream
    std::vector<std::uint8_t> has_prev(n_streams, 0);
    std::vector<CounterRng> stream_rng;
    stream_rng.reserve(n_streams);
    for (std::size_t s = 0; s < n_streams; ++s) stream_rng.push_back(master.derive(1000 + s));

    for (std::size_t i = 0; i < cfg.n_records; ++i) {
        std::size_t s = i % n_streams;
        std::size_t pos = i / n_streams;
        std::size_t patient = s / cfg.n_sensors_per_patient;
        std::size_t sensor = s % cfg.n_sensors_per_patient;
        const VitalsBaseline& b = patient_base[patient];
        CounterRng& rng = stream_rng[s];

        DeviceRecord r;
        r.patient_id = "P" + std::to_string(patient + 1);
        r.sensor_id = "S" + std::to_string(sensor + 1);
        r.sensor_type = sensor_types[sensor % 9];
        r.timestamp = cfg.start_time + static_cast<double>(pos) * 60.0 + static_cast<double>(s);
        double drain_frac = per_stream > 1
                                ? static_cast<double>(pos) / static_cast<double>(per_stream - 1)
                                : 0.0;
        r.temperature = rng.gaussian(b.temp_mean, b.temp_sd);
        r.heart_rate = rng.gaussian(b.hr_mean, b.hr_sd);
        r.systolic_bp = rng.gaussian(b.sys_mean, b.sys_sd);
        r.diastolic_bp = rng.gaussian(b.dia_mean, b.dia_sd);
        r.battery_level = std::clamp(
            b.battery_start + drain_frac * (b.battery_end - b.battery_start) + rng.gaussian(0.0, 0.5),
            0.0, 100.0);
        r.target_blood_pressure = b.sys_mean;
        r.target_heart_rate = b.hr_mean;
        r.target_health_status = "stable";
        r.label = 0;

        if (anomalous[i]) {
            r.label = 1;
            auto fault = static_cast<DeviceFault>(detail::pick_weighted(cfg.device_weights, kind_rng));
            switch (fault) {
                case DeviceFault::TEMP_SPIKE:
                    *r.temperature += rng.uniform(4.0, 8.0);
                    // Fever-grade spikes come with tachycardia.
                    *r.heart_rate += rng.uniform(35.0, 65.0);
                    break;
                case DeviceFault::BATTERY_COLLAPSE: {
                    r.battery_level = rng.uniform(0.0, 3.0);
                    // Brown-out: the starved sensor also reads erratically.
                    auto glitch = [&](double lo, double hi) {
                        double magnitude = rng.uniform(lo, hi);
                        return rng.uniform() < 0.5 ? -magnitude : magnitude;
                    };
                    *r.temperature += glitch(2.0, 5.0);
                    *r.heart_rate += glitch(30.0, 60.0);
                    *r.systolic_bp += glitch(25.0, 50.0);
                    break;
                }
                case DeviceFault::FROZEN_READING:
                    // Stuck sensor: the previous reading repeats verbatim.
                    if (has_prev[s]) {
                        r.temperature = prev[s].temperature;
                        r.heart_rate = prev[s].heart_rate;
                        r.systolic_bp = prev[s].systolic_bp;
                        r.diastolic_bp = prev[s].diastolic_bp;
                        r.battery_level = prev[s].battery_level;
                    } else {
                        r.temperature = b.temp_mean;
                        r.heart_rate = b.hr_mean;
                        r.systolic_bp = b.sys_mean;
                        r.diastolic_bp = b.dia_mean;
                    }
                    break;
                case DeviceFault::EXTREME_VALUE:
                    switch (rng.uniform_index(3)) {
                        case 0:  // tachycardic crisis
                            r.heart_rate = rng.uniform(180.0, 240.0);
                            break;
                        case 1:  // hypothermia with matching bradycardia
                            r.temperature = rng.uniform(29.0, 33.0);
                            r.heart_rate = rng.uniform(25.0, 40.0);
                            break;
                        default:  // hypertensive crisis hits both pressure channels
                            r.systolic_bp = rng.uniform(190.0, 230.0);
                            r.diastolic_bp = rng.uniform(120.0, 150.0);
                            break;
                    }
                    break;
            }
        }
        r.validate();
        prev[s] = r;
        has_prev[s] = 1;
        out[i] = std::move(r);
    }
    std::stable_sort(out.begin(), out.end(), [](const DeviceRecord& a, const DeviceRecord& b) {
        if (a.patient_id != b.patient_id) return a.patient_id < b.patient_id;
        if (a.sensor_id != b.sensor_id) return a.sensor_id < b.sensor_id;
        return a.timestamp < b.timestamp;
    });
    return out;
}

/// Deterministic synthetic MQTT/TCP traffic. Normal traffic is periodic
/// publishes from monitoring devices to the broker; attacks realize one of
/// SYN burst, reset storm, or MQTT exploit.
inline std::vector<NetRecord> generate_attack_data(const GenConfig& cfg) {
    cfg.validate();
    CounterRng master(cfg.seed ^ 0xA77AC4DA7AULL);  // attack stream domain separator
    auto anomalous = detail::pick_anomalies(cfg.n_records, cfg.anomaly_rate, master.derive(1));
    CounterRng kind_rng = master.derive(2);
    CounterRng rng = master.derive(3);

    std::size_t n_devices = cfg.n_patients * cfg.n_sensors_per_patient;
    const std::string broker = "192.168.0.10";
    static const char* vitals[] = {"hr", "bp", "temp", "spo2"};

    std::vector<NetRecord> out(cfg.n_records);
    double clock = 0.0;
    for (std::size_t i = 0; i < cfg.n_records; ++i) {
        NetRecord r;
        std::size_t dev = rng.uniform_index(n_devices);
        r.ip_src = "192.168.0." + std::to_string(101 + dev % 8);
        r.ip_dst = broker;
        r.tcp_dstport = 1883.0;
        r.tcp_srcport = static_cast<double>(49152 + rng.uniform_index(4096));

        if (!anomalous[i]) {
            r.frame_time_delta = std::abs(rng.gaussian(1.0, 0.08));
            r.frame_len = std::max(54.0, rng.gaussian(120.0, 15.0));
            r.tcp_flags_ack = 1.0;
            r.tcp_flags_push = 1.0;
            r.tcp_flags_fin = 0.0;
            r.tcp_flags_reset = 0.0;
            r.tcp_flags_syn = 0.0;
            r.mqtt_msgtype = 3.0;  // PUBLISH
            r.mqtt_qos = static_cast<double>(rng.uniform_index(2));
            r.mqtt_retain = 0.0;
            r.mqtt_topic = "ward/bed" + std::to_string(dev % 4 + 1) + "/" +
                           vitals[rng.uniform_index(4)];
            r.mqtt_clientid = "monitor-" + std::to_string(dev + 1);
            r.label = 0;
        } else {
            r.label = 1;
            auto kind = static_cast<AttackKind>(detail::pick_weighted(cfg.attack_weights, kind_rng));
            switch (kind) {
                case AttackKind::SYN_BURST:
                    r.ip_src = "10.0.0." + std::to_string(60 + rng.uniform_index(4));
                    r.frame_time_delta = std::abs(rng.gaussian(0.002, 0.001));
                    r.frame_len = std::max(40.0, rng.gaussian(60.0, 4.0));
                    r.tcp_flags_syn = 1.0;
                    r.tcp_flags_ack = 0.0;
                    r.tcp_flags_push = 0.0;
                    r.tcp_flags_fin = 0.0;
                    r.tcp_flags_reset = 0.0;
                    r.mqtt_msgtype = 0.0;
                    r.mqtt_qos = 0.0;
                    r.mqtt_retain = 0.0;
                    break;
                case AttackKind::RESET_STORM:
                    r.frame_time_delta = std::abs(rng.gaussian(0.01, 0.005));
                    r.frame_len = std::max(40.0, rng.gaussian(60.0, 4.0));
                    r.tcp_flags_reset = 1.0;
                    r.tcp_flags_ack = 1.0;
                    r.tcp_flags_push = 0.0;
                    r.tcp_flags_fin = 0.0;
                    r.tcp_flags_syn = 0.0;
                    r.mqtt_msgtype = 0.0;
                    r.mqtt_qos = 0.0;
                    r.mqtt_retain = 0.0;
                    break;
                case AttackKind::MQTT_EXPLOIT: {
                    r.frame_time_delta = std::abs(rng.gaussian(0.05, 0.02));
                    r.frame_len = std::max(54.0, rng.gaussian(400.0, 50.0));
                    r.tcp_flags_ack = 1.0;
                    r.tcp_flags_push = 1.0;
                    r.tcp_flags_fin = 0.0;
                    r.tcp_flags_reset = 0.0;
                    r.tcp_flags_syn = 0.0;
                    r.mqtt_msgtype = rng.uniform_index(2) == 0 ? 1.0 : 14.0;  // CONNECT flood / reserved
                    r.mqtt_qos = 2.0;
                    r.mqtt_retain = 1.0;
                    std::size_t len = 100 + rng.uniform_index(100);
                    r.mqtt_topic.assign(len, 'A');
                    r.mqtt_clientid = "crafted-" + std::to_string(rng.uniform_index(1000));
                    break;
                }
            }
        }
        clock += r.frame_time_delta.value_or(0.0);
        r.frame_time_relative = clock;
        r.extra["mqtt.topic_len"] = static_cast<double>(r.mqtt_topic.size());
        r.extra["mqtt.clientid_len"] = static_cast<double>(r.mqtt_clientid.size());
        r.validate();
        out[i] = std::move(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV emission (same schema the parsers read, so synthetic and real data are
// interchangeable)
// ---------------------------------------------------------------------------

inline void write_device_csv(const std::string& path, const std::vector<DeviceRecord>& records,
                             const std::string& label_column = device_columns::default_label) {
    csv::Table t;
    t.header = device_columns::required;
    t.header.push_back(label_column);
    auto fmt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; };
    for (const auto& r : records) {
        t.rows.push_back({r.patient_id, csv::format_double(r.timestamp), r.sensor_id,
                          r.sensor_type, fmt(r.temperature), fmt(r.systolic_bp),
                          fmt(r.diastolic_bp), fmt(r.heart_rate), fmt(r.battery_level),
                          fmt(r.target_blood_pressure), fmt(r.target_heart_rate),
                          r.target_health_status, std::to_string(r.label)});
    }
    csv::write_file(path, t);
}

inline void write_attack_csv(const std::string& path, const std::vector<NetRecord>& records,
                             const std::string& label_column = attack_columns::default_label) {
    // Extra columns are written by name; the derived length features are
    // skipped because the parser re-derives them from the strings.
    std::vector<std::string> extra_cols;
    for (const auto& r : records)
        for (const auto& [name, _] : r.extra)
            if (name != "mqtt.topic_len" && name != "mqtt.clientid_len" &&
                std::find(extra_cols.begin(), extra_cols.end(), name) == extra_cols.end())
                extra_cols.push_back(name);
    std::sort(extra_cols.begin(), extra_cols.end());

    csv::Table t;
    t.header = attack_columns::required;
    for (const auto& c : extra_cols) t.header.push_back(c);
    t.header.push_back(label_column);

    auto fmt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; };
    for (const auto& r : records) {
        std::vector<std::string> row = {
            fmt(r.frame_time_delta), fmt(r.frame_time_relative), fmt(r.frame_len),
            r.ip_src,                r.ip_dst,
            fmt(r.tcp_srcport),      fmt(r.tcp_dstport),
            fmt(r.tcp_flags_ack),    fmt(r.tcp_flags_fin), fmt(r.tcp_flags_push),
            fmt(r.tcp_flags_reset),  fmt(r.tcp_flags_syn),
            fmt(r.mqtt_msgtype),     fmt(r.mqtt_qos),      fmt(r.mqtt_retain),
            r.mqtt_topic,            r.mqtt_clientid};
        for (const auto& c : extra_cols) {
            auto it = r.extra.find(c);
            row.push_back(it != r.extra.end() ? csv::format_double(it->second) : "");
        }
        row.push_back(std::to_string(r.label));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

}  // namespace shield
