// Command-line front end: generate / select / bench / report subcommands
// driven by a JSON config file, with flags overriding config fields.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shield/eval.hpp"
#include "shield/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDetector = 3;

struct CommonFlags {
    std::string config_path;
    std::string task;
    std::string input_csv;
    std::string out_dir;
    std::string models_csv;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t n_records = 0;
    double anomaly_rate = 0.0;
    bool generate_input = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--task", f.task, "device or cyber");
    cmd->add_option("--input", f.input_csv, "input CSV path");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--models", f.models_csv, "comma-separated detector families");
    cmd->add_option("--n", f.n_records, "generator record count");
    cmd->add_option("--rate", f.anomaly_rate, "generator anomaly rate");
    cmd->add_flag("--generate", f.generate_input, "synthesize input data");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&f](std::uint64_t v) {
            f.seed = v;
            f.seed_set = true;
        },
        "PRNG seed (reproducible runs)");
}

shield::RunConfig build_config(const CommonFlags& f) {
    shield::RunConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw shield::DataError("cannot open config: " + f.config_path);
        nlohmann::json j;
        in >> j;
        cfg = shield::config_from_json(j);
    }
    if (!f.task.empty()) cfg.task = f.task;
    if (!f.input_csv.empty()) {
        cfg.input_csv = f.input_csv;
        cfg.use_generator = false;
    }
    if (f.generate_input || (cfg.input_csv.empty() && !cfg.use_generator)) cfg.use_generator = true;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.seed_set) {
        cfg.seed = f.seed;
        cfg.gen.seed = f.seed;
    }
    if (f.n_records > 0) cfg.gen.n_records = f.n_records;
    if (f.anomaly_rate > 0.0) cfg.gen.anomaly_rate = f.anomaly_rate;
    if (!f.models_csv.empty()) {
        cfg.models.clear();
        std::stringstream ss(f.models_csv);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.models.push_back(item);
    }
    return cfg;
}

int cmd_generate(const CommonFlags& f) {
    auto cfg = build_config(f);
    cfg.use_generator = true;
    cfg.input_csv.clear();
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    std::size_t n_anomalous = 0;
    std::string path;
    if (cfg.task == "device") {
        auto records = shield::generate_device_data(cfg.gen);
        for (const auto& r : records) n_anomalous += static_cast<std::size_t>(r.label);
        path = cfg.out_dir + "/device.csv";
        shield::write_device_csv(path, records);
    } else {
        auto records = shield::generate_attack_data(cfg.gen);
        for (const auto& r : records) n_anomalous += static_cast<std::size_t>(r.label);
        path = cfg.out_dir + "/attack.csv";
        shield::write_attack_csv(path, records);
    }
    std::cout << "wrote " << path << ": " << cfg.gen.n_records << " rows, " << n_anomalous
              << " labeled anomalous\n";
    return kExitOk;
}

int cmd_select(const CommonFlags& f) {
    auto cfg = build_config(f);
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    auto built = shield::load_features(cfg);
    auto sel = shield::select_features(cfg, built);
    shield::write_score_csv(cfg.out_dir + "/feature_scores.csv", sel.tables);
    std::ofstream out(cfg.out_dir + "/selected_features.csv", std::ios::binary);
    out << "feature\n";
    for (const auto& name : sel.selected) out << shield::csv::quote_field(name) << "\n";
    std::cout << "selected " << sel.selected.size() << " features:\n";
    for (const auto& name : sel.selected) std::cout << "  " << name << "\n";
    return kExitOk;
}

int cmd_bench(const CommonFlags& f) {
    auto cfg = build_config(f);
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    auto out = shield::run_pipeline(cfg);
    shield::write_score_csv(cfg.out_dir + "/feature_scores.csv", out.selection.tables);
    shield::emit_report(out.report, cfg.out_dir);
    for (const auto& row : out.report.rows) {
        std::cout << row.model << " [" << row.status << "]";
        if (row.f1) std::cout << " f1=" << *row.f1;
        if (row.accuracy) std::cout << " acc=" << *row.accuracy;
        if (row.detect_seconds) std::cout << " detect_s=" << *row.detect_seconds;
        std::cout << "\n";
    }
    std::cout << "report written to " << cfg.out_dir << "/report.json\n";
    return out.any_detector_error ? kExitDetector : kExitOk;
}

int cmd_report(const std::string& input, const std::string& out_dir) {
    std::ifstream in(input);
    if (!in) throw shield::DataError("cannot open report: " + input);
    nlohmann::json j;
    in >> j;
    auto report = shield::report_from_json(j);
    std::filesystem::create_directories(out_dir);
    shield::emit_report(report, out_dir);
    std::cout << "re-rendered report into " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SHIELD anomaly-detection engine and benchmark harness"};
    app.require_subcommand(1);

    // SHIELD_THREADS caps internal workers; the engine is currently
    // single-threaded, so any positive value is honored trivially.
    if (const char* env = std::getenv("SHIELD_THREADS")) {
        if (std::atoi(env) < 1) {
            std::cerr << "SHIELD_THREADS must be a positive integer\n";
            return kExitUsage;
        }
    }

    CommonFlags fgen, fsel, fbench;
    std::string report_input, report_out = "out";

    add_common(app.add_subcommand("generate", "write synthetic CSV datasets"), fgen);
    add_common(app.add_subcommand("select", "run feature selection and export scores"), fsel);
    add_common(app.add_subcommand("bench", "full pipeline benchmark with report emission"), fbench);
    auto* rep = app.add_subcommand("report", "re-render CSV/SVG from a saved JSON report");
    rep->add_option("--input", report_input, "saved report.json")->required();
    rep->add_option("--out", report_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("generate")) return cmd_generate(fgen);
        if (app.got_subcommand("select")) return cmd_select(fsel);
        if (app.got_subcommand("bench")) return cmd_bench(fbench);
        if (app.got_subcommand("report")) return cmd_report(report_input, report_out);
    } catch (const shield::DetectorError& e) {
        std::cerr << "detector error: " << e.what() << "\n";
        return kExitDetector;
    } catch (const shield::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
