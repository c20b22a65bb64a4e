#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shield/datamodel.hpp"
#include "shield/detectors/gbdt.hpp"
#include "shield/detectors/isoforest.hpp"
#include "shield/detectors/knn.hpp"
#include "shield/detectors/neural.hpp"
#include "shield/detectors/ocsvm.hpp"
#include "shield/detectors/threshold.hpp"
#include "shield/preprocess.hpp"

namespace shield {

/// A fitted detector plus the training-time scaler statistics and the fitted
/// score threshold. Shared contract: higher score = more anomalous.
struct TrainedModel {
    DetectorSpec spec;
    std::variant<GbdtModel, KnnModel, IsoForestModel, OcsvmModel, NeuralModel> impl;
    ScalerStats scaler;
    double threshold = 0.5;
};

/// Fit a detector on the appropriately scaled feature matrix. The supervised
/// families use the labels directly; Isolation Forest, OC-SVM, AE and VAE
/// consume only the rows labeled normal. (Training the forest on contaminated
/// data lets dense anomaly clusters mask themselves as normal modes.)
inline TrainedModel fit_detector(const DetectorSpec& spec, const FeatureMatrix& X,
                                 const std::vector<int>& y, const ScalerStats& scaler = {}) {
    TrainedModel m;
    m.spec = spec;
    m.scaler = scaler;
    switch (spec.family) {
        case DetectorFamily::GBDT:
            m.impl = gbdt_fit(X, y, spec);
            m.threshold = 0.5;
            break;
        case DetectorFamily::KNN:
            m.impl = knn_fit(X, y, spec);
            m.threshold = 0.5;
            break;
        case DetectorFamily::ISOFOREST: {
            std::vector<std::size_t> normal;
            for (std::size_t r = 0; r < y.size(); ++r)
                if (y[r] == 0) normal.push_back(r);
            if (normal.empty()) throw DetectorError("no normal rows to train on");
            FeatureMatrix Xn = X.select_rows(normal);
            auto model = isoforest_fit(Xn, spec);
            auto scores = isoforest_score(model, Xn);
            m.threshold = nearest_rank_percentile(scores, 100.0 * (1.0 - spec.contamination));
            m.impl = std::move(model);
            break;
        }
        case DetectorFamily::OCSVM:
        case DetectorFamily::AUTOENCODER:
        case DetectorFamily::VAE: {
            std::vector<std::size_t> normal;
            for (std::size_t r = 0; r < y.size(); ++r)
                if (y[r] == 0) normal.push_back(r);
            if (normal.empty()) throw DetectorError("no normal rows to train on");
            FeatureMatrix Xn = X.select_rows(normal);
            if (spec.family == DetectorFamily::OCSVM) {
                m.impl = ocsvm_fit(Xn, spec);
                m.threshold = 0.0;
            } else {
                auto model = neural_fit(Xn, spec);
                m.threshold = model.train_threshold;
                m.impl = std::move(model);
            }
            break;
        }
    }
    return m;
}

inline std::vector<double> score_detector(const TrainedModel& m, const FeatureMatrix& X) {
    switch (m.spec.family) {
        case DetectorFamily::GBDT: return gbdt_score(std::get<GbdtModel>(m.impl), X);
        case DetectorFamily::KNN: return knn_score(std::get<KnnModel>(m.impl), X);
        case DetectorFamily::ISOFOREST:
            return isoforest_score(std::get<IsoForestModel>(m.impl), X);
        case DetectorFamily::OCSVM: return ocsvm_score(std::get<OcsvmModel>(m.impl), X);
        case DetectorFamily::AUTOENCODER:
        case DetectorFamily::VAE:
            return std::get<NeuralModel>(m.impl).net.reconstruction_error(X);
    }
    throw DetectorError("unreachable");
}

/// Family-specific flag rule over a scored evaluation set.
inline std::vector<int> flag_detector(const TrainedModel& m, const std::vector<double>& scores) {
    switch (m.spec.family) {
        case DetectorFamily::GBDT:
        case DetectorFamily::KNN: {
            std::vector<int> flags(scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] >= 0.5 ? 1 : 0;
            return flags;
        }
        case DetectorFamily::ISOFOREST:
            return top_fraction_flags(scores, m.spec.contamination);
        case DetectorFamily::OCSVM: return ocsvm_flags(scores);
        case DetectorFamily::AUTOENCODER:
        case DetectorFamily::VAE:
            return threshold_flags(scores, m.spec.threshold_percentile);
    }
    throw DetectorError("unreachable");
}

// ---------------------------------------------------------------------------
// Serialization (versioned JSON; doubles round-trip exactly)
// ---------------------------------------------------------------------------

namespace model_json {

using nlohmann::json;

inline json dump_matrix(const FeatureMatrix& m) {
    json j;
    j["columns"] = m.column_names();
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline FeatureMatrix load_matrix(const json& j) {
    FeatureMatrix m(j.at("columns").get<std::vector<std::string>>(), j.at("rows").size());
    std::size_t r = 0;
    for (const auto& row : j.at("rows")) {
        for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) = row.at(c).get<double>();
        ++r;
    }
    return m;
}

inline json dump_spec(const DetectorSpec& s) {
    return {{"family", family_name(s.family)},
            {"learning_rate", s.learning_rate},
            {"max_depth", s.max_depth},
            {"n_rounds", s.n_rounds},
            {"l2_lambda", s.l2_lambda},
            {"k", s.k},
            {"distance", s.distance},
            {"contamination", s.contamination},
            {"n_trees", s.n_trees},
            {"subsample", s.subsample},
            {"nu", s.nu},
            {"gamma", s.gamma},
            {"max_train_rows", s.max_train_rows},
            {"latent_dim", s.latent_dim},
            {"epochs", s.epochs},
            {"batch_size", s.batch_size},
            {"hidden_width", s.hidden_width},
            {"threshold_percentile", s.threshold_percentile},
            {"seed", s.seed}};
}

inline DetectorSpec load_spec(const json& j) {
    DetectorSpec s;
    s.family = family_from_name(j.at("family").get<std::string>());
    s.learning_rate = j.at("learning_rate").get<double>();
    s.max_depth = j.at("max_depth").get<int>();
    s.n_rounds = j.at("n_rounds").get<int>();
    s.l2_lambda = j.at("l2_lambda").get<double>();
    s.k = j.at("k").get<int>();
    s.distance = j.at("distance").get<std::string>();
    s.contamination = j.at("contamination").get<double>();
    s.n_trees = j.at("n_trees").get<int>();
    s.subsample = j.at("subsample").get<int>();
    s.nu = j.at("nu").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.max_train_rows = j.at("max_train_rows").get<int>();
    s.latent_dim = j.at("latent_dim").get<int>();
    s.epochs = j.at("epochs").get<int>();
    s.batch_size = j.at("batch_size").get<int>();
    s.hidden_width = j.at("hidden_width").get<int>();
    s.threshold_percentile = j.at("threshold_percentile").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

inline json dump_scaler(const ScalerStats& s) {
    return {{"columns", s.columns}, {"mean", s.mean},   {"stddev", s.stddev},
            {"min", s.min},         {"max", s.max},     {"fitted", s.fitted}};
}

inline ScalerStats load_scaler(const json& j) {
    ScalerStats s;
    s.columns = j.at("columns").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    s.min = j.at("min").get<std::vector<double>>();
    s.max = j.at("max").get<std::vector<double>>();
    s.fitted = j.at("fitted").get<bool>();
    return s;
}

}  // namespace model_json

inline nlohmann::json model_to_json(const TrainedModel& m) {
    using nlohmann::json;
    json j;
    j["schema_version"] = 1;
    j["spec"] = model_json::dump_spec(m.spec);
    j["scaler"] = model_json::dump_scaler(m.scaler);
    j["threshold"] = m.threshold;
    json body;
    switch (m.spec.family) {
        case DetectorFamily::GBDT: {
            const auto& g = std::get<GbdtModel>(m.impl);
            body["base_score"] = g.base_score;
            body["learning_rate"] = g.learning_rate;
            body["max_depth"] = g.max_depth;
            body["l2_lambda"] = g.l2_lambda;
            json trees = json::array();
            for (const auto& t : g.trees) {
                json nodes = json::array();
                for (const auto& nd : t.nodes)
                    nodes.push_back({{"f", nd.feature},
                                     {"t", nd.threshold},
                                     {"l", nd.left},
                                     {"r", nd.right},
                                     {"w", nd.weight}});
                trees.push_back(std::move(nodes));
            }
            body["trees"] = std::move(trees);
            break;
        }
        case DetectorFamily::KNN: {
            const auto& k = std::get<KnnModel>(m.impl);
            body["train"] = model_json::dump_matrix(k.train);
            body["labels"] = k.labels;
            body["k"] = k.k;
            break;
        }
        case DetectorFamily::ISOFOREST: {
            const auto& f = std::get<IsoForestModel>(m.impl);
            body["subsample"] = f.subsample;
            body["height_limit"] = f.height_limit;
            body["contamination"] = f.contamination;
            body["seed"] = f.seed;
            json trees = json::array();
            for (const auto& t : f.trees) {
                json nodes = json::array();
                for (const auto& nd : t.nodes)
                    nodes.push_back({{"f", nd.feature},
                                     {"s", nd.split},
                                     {"l", nd.left},
                                     {"r", nd.right},
                                     {"n", nd.size}});
                trees.push_back(std::move(nodes));
            }
            body["trees"] = std::move(trees);
            break;
        }
        case DetectorFamily::OCSVM: {
            const auto& o = std::get<OcsvmModel>(m.impl);
            body["support_vectors"] = model_json::dump_matrix(o.support_vectors);
            body["alpha"] = o.alpha;
            body["rho"] = o.rho;
            body["gamma"] = o.gamma;
            body["nu"] = o.nu;
            break;
        }
        case DetectorFamily::AUTOENCODER:
        case DetectorFamily::VAE: {
            const auto& nn = std::get<NeuralModel>(m.impl);
            body["input_dim"] = nn.net.input_dim();
            body["params"] = nn.net.params();
            body["train_threshold"] = nn.train_threshold;
            break;
        }
    }
    j["model"] = std::move(body);
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1)
        throw DataError("unsupported model schema_version");
    TrainedModel m;
    m.spec = model_json::load_spec(j.at("spec"));
    m.scaler = model_json::load_scaler(j.at("scaler"));
    m.threshold = j.at("threshold").get<double>();
    const auto& body = j.at("model");
    switch (m.spec.family) {
        case DetectorFamily::GBDT: {
            GbdtModel g;
            g.base_score = body.at("base_score").get<double>();
            g.learning_rate = body.at("learning_rate").get<double>();
            g.max_depth = body.at("max_depth").get<int>();
            g.l2_lambda = body.at("l2_lambda").get<double>();
            for (const auto& tj : body.at("trees")) {
                GbdtTree t;
                for (const auto& nj : tj)
                    t.nodes.push_back({nj.at("f").get<int>(), nj.at("t").get<double>(),
                                       nj.at("l").get<int>(), nj.at("r").get<int>(),
                                       nj.at("w").get<double>()});
                g.trees.push_back(std::move(t));
            }
            m.impl = std::move(g);
            break;
        }
        case DetectorFamily::KNN: {
            KnnModel k;
            k.train = model_json::load_matrix(body.at("train"));
            k.labels = body.at("labels").get<std::vector<int>>();
            k.k = body.at("k").get<int>();
            m.impl = std::move(k);
            break;
        }
        case DetectorFamily::ISOFOREST: {
            IsoForestModel f;
            f.subsample = body.at("subsample").get<std::size_t>();
            f.height_limit = body.at("height_limit").get<int>();
            f.contamination = body.at("contamination").get<double>();
            f.seed = body.at("seed").get<std::uint64_t>();
            for (const auto& tj : body.at("trees")) {
                IsoTree t;
                for (const auto& nj : tj)
                    t.nodes.push_back({nj.at("f").get<int>(), nj.at("s").get<double>(),
                                       nj.at("l").get<int>(), nj.at("r").get<int>(),
                                       nj.at("n").get<std::size_t>()});
                f.trees.push_back(std::move(t));
            }
            m.impl = std::move(f);
            break;
        }
        case DetectorFamily::OCSVM: {
            OcsvmModel o;
            o.support_vectors = model_json::load_matrix(body.at("support_vectors"));
            o.alpha = body.at("alpha").get<std::vector<double>>();
            o.rho = body.at("rho").get<double>();
            o.gamma = body.at("gamma").get<double>();
            o.nu = body.at("nu").get<double>();
            m.impl = std::move(o);
            break;
        }
        case DetectorFamily::AUTOENCODER:
        case DetectorFamily::VAE: {
            NeuralModel nn;
            bool vae = m.spec.family == DetectorFamily::VAE;
            nn.net = NeuralNet(body.at("input_dim").get<int>(), m.spec.hidden_width,
                               m.spec.latent_dim, vae, m.spec.seed);
            auto params = body.at("params").get<std::vector<double>>();
            if (params.size() != nn.net.params().size())
                throw DataError("neural model parameter count mismatch");
            nn.net.params() = std::move(params);
            nn.train_threshold = body.at("train_threshold").get<double>();
            m.impl = std::move(nn);
            break;
        }
    }
    return m;
}

inline void save_model(const TrainedModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << model_to_json(m).dump(2) << '\n';
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace shield
