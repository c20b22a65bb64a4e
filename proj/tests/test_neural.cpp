#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "shield/detectors/neural.hpp"
#include "shield/rng.hpp"

using namespace shield;

namespace {

FeatureMatrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < d; ++c) names.push_back("f" + std::to_string(c));
    FeatureMatrix m(names, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) m.at(r, c) = rng.uniform();
    return m;
}

double max_relative_gradient_error(NeuralNet& net, const FeatureMatrix& X,
                                   const std::vector<double>& eps) {
    auto analytic = net.gradient(X, eps);
    auto& params = net.params();
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double saved = params[i];
        params[i] = saved + h;
        double up = net.loss(X, eps);
        params[i] = saved - h;
        double down = net.loss(X, eps);
        params[i] = saved;
        double fd = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("KL divergence identities") {
    std::vector<double> zero = {0.0, 0.0};
    CHECK(gaussian_kl(zero, zero) == Catch::Approx(0.0).margin(1e-12));
    std::vector<double> unit_mu = {1.0};
    std::vector<double> logvar = {0.0};
    CHECK(gaussian_kl(unit_mu, logvar) == Catch::Approx(0.5).margin(1e-12));
    // KL is non-negative on arbitrary inputs.
    CHECK(gaussian_kl({0.3, -1.2}, {0.4, -0.7}) >= 0.0);
}

TEST_CASE("autoencoder analytic gradient matches finite differences") {
    NeuralNet net(6, 4, 2, false, 42);  // 6-4-2-4-6
    auto X = random_rows(10, 6, 1);
    std::vector<double> no_eps;
    CHECK(max_relative_gradient_error(net, X, no_eps) <= 1e-4);
}

TEST_CASE("vae analytic gradient matches finite differences") {
    NeuralNet net(6, 4, 2, true, 43);
    auto X = random_rows(10, 6, 2);
    CounterRng rng(3);
    std::vector<double> eps(10 * 2);
    for (auto& e : eps) e = rng.gaussian();
    CHECK(max_relative_gradient_error(net, X, eps) <= 1e-4);
    // And at eps = 0 (the deterministic scoring path).
    std::vector<double> zero_eps(10 * 2, 0.0);
    CHECK(max_relative_gradient_error(net, X, zero_eps) <= 1e-4);
}

TEST_CASE("monitored training loss never increases") {
    auto X = random_rows(64, 5, 5);
    for (bool vae : {false, true}) {
        NeuralNet net(5, 8, 2, vae, 7);
        net.train(X, 20, 16, 0.05, 7);
        const auto& losses = net.epoch_losses();
        REQUIRE(losses.size() == 21);
        for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] + 1e-12);
    }
}

TEST_CASE("training reduces reconstruction error on structured data") {
    // Rows on a 1-D manifold: x2 = x1, x3 = 1 - x1.
    CounterRng rng(9);
    FeatureMatrix X({"a", "b", "c"}, 128);
    for (std::size_t r = 0; r < 128; ++r) {
        double t = rng.uniform();
        X.at(r, 0) = t;
        X.at(r, 1) = t;
        X.at(r, 2) = 1.0 - t;
    }
    NeuralNet net(3, 8, 1, false, 11);
    std::vector<double> no_eps;
    double before = net.loss(X, no_eps);
    net.train(X, 100, 16, 0.05, 11);
    CHECK(net.loss(X, no_eps) < before * 0.5);
}

TEST_CASE("fitting is deterministic per seed") {
    auto X = random_rows(50, 4, 6);
    DetectorSpec spec;
    spec.family = DetectorFamily::VAE;
    spec.latent_dim = 2;
    spec.epochs = 5;
    spec.seed = 123;
    auto a = neural_fit(X, spec);
    auto b = neural_fit(X, spec);
    CHECK(a.net.params() == b.net.params());
    CHECK(a.train_threshold == b.train_threshold);
}

TEST_CASE("vae scores deterministically by decoding from the mean") {
    auto X = random_rows(30, 4, 8);
    DetectorSpec spec;
    spec.family = DetectorFamily::VAE;
    spec.latent_dim = 2;
    spec.epochs = 3;
    spec.seed = 5;
    auto model = neural_fit(X, spec);
    auto e1 = model.net.reconstruction_error(X);
    auto e2 = model.net.reconstruction_error(X);
    CHECK(e1 == e2);
}

TEST_CASE("train threshold is the chosen percentile of training errors") {
    auto X = random_rows(40, 4, 10);
    DetectorSpec spec;
    spec.family = DetectorFamily::AUTOENCODER;
    spec.epochs = 3;
    spec.threshold_percentile = 80.0;
    spec.seed = 2;
    auto model = neural_fit(X, spec);
    auto errors = model.net.reconstruction_error(X);
    CHECK(model.train_threshold == nearest_rank_percentile(errors, 80.0));
}

TEST_CASE("empty training set is rejected") {
    FeatureMatrix empty({"a"}, 0);
    CHECK_THROWS_AS(neural_fit(empty, DetectorSpec{}), DetectorError);
}
