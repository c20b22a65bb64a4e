#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "shield/detectors/ocsvm.hpp"
#include "shield/rng.hpp"

using namespace shield;

namespace {

FeatureMatrix gaussian_cloud(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    FeatureMatrix m({"x", "y"}, n);
    for (std::size_t r = 0; r < n; ++r) {
        m.at(r, 0) = rng.gaussian();
        m.at(r, 1) = rng.gaussian();
    }
    return m;
}

}  // namespace

TEST_CASE("rbf kernel of a point with itself is one") {
    double x[] = {1.5, -2.0};
    CHECK(ocsvm_detail::rbf(x, x, 2, 0.7) == 1.0);
}

TEST_CASE("duals sum to one and respect the box constraint") {
    auto X = gaussian_cloud(300, 1);
    DetectorSpec spec;
    spec.family = DetectorFamily::OCSVM;
    spec.nu = 0.2;
    spec.gamma = 0.5;
    auto model = ocsvm_fit(X, spec);
    double sum = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    double C = 1.0 / (0.2 * 300.0);
    for (double a : model.alpha) {
        CHECK(a > 0.0);
        CHECK(a <= C + 1e-12);
    }
}

TEST_CASE("nu bounds the flagged fraction and the support-vector fraction") {
    for (double nu : {0.1, 0.2}) {
        auto X = gaussian_cloud(500, 7);
        DetectorSpec spec;
        spec.family = DetectorFamily::OCSVM;
        spec.nu = nu;
        spec.gamma = 0.5;
        spec.max_train_rows = 0;
        auto model = ocsvm_fit(X, spec);
        auto flags = ocsvm_flags(ocsvm_score(model, X));
        double flagged = 0;
        for (int f : flags) flagged += f;
        flagged /= 500.0;
        double sv_frac = static_cast<double>(model.support_vectors.rows()) / 500.0;
        CHECK(flagged <= nu + 0.02);
        CHECK(sv_frac >= nu - 0.02);
    }
}

TEST_CASE("a far query point is flagged anomalous") {
    auto X = gaussian_cloud(200, 3);
    DetectorSpec spec;
    spec.family = DetectorFamily::OCSVM;
    spec.nu = 0.1;
    spec.gamma = 0.1;
    auto model = ocsvm_fit(X, spec);
    FeatureMatrix far({"x", "y"}, 1);
    far.at(0, 0) = 100.0;
    far.at(0, 1) = 100.0;
    auto score = ocsvm_score(model, far);
    CHECK(score[0] > 0.0);
    CHECK(ocsvm_flags(score)[0] == 1);
    // At that distance the kernel sum vanishes, so the score approaches rho.
    CHECK(score[0] == Catch::Approx(model.rho).margin(1e-9));
}

TEST_CASE("decision values are invariant under training-row permutation") {
    auto X = gaussian_cloud(150, 11);
    std::vector<std::size_t> perm(150);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 37 + 5) % 150;  // a permutation
    auto Xp = X.select_rows(perm);

    DetectorSpec spec;
    spec.family = DetectorFamily::OCSVM;
    spec.nu = 0.2;
    spec.gamma = 0.5;
    spec.max_train_rows = 0;
    auto q = gaussian_cloud(20, 12);
    auto s1 = ocsvm_score(ocsvm_fit(X, spec), q);
    auto s2 = ocsvm_score(ocsvm_fit(Xp, spec), q);
    for (std::size_t i = 0; i < s1.size(); ++i)
        CHECK(s1[i] == Catch::Approx(s2[i]).margin(1e-4));
}

TEST_CASE("oversized training sets are capped by a seeded subsample") {
    auto X = gaussian_cloud(500, 21);
    DetectorSpec spec;
    spec.family = DetectorFamily::OCSVM;
    spec.nu = 0.2;
    spec.gamma = 0.5;
    spec.max_train_rows = 100;
    auto model = ocsvm_fit(X, spec);
    CHECK(model.support_vectors.rows() <= 100);
    // Deterministic subsample.
    auto model2 = ocsvm_fit(X, spec);
    CHECK(model.rho == model2.rho);
    CHECK(model.alpha == model2.alpha);
}

TEST_CASE("invalid nu and empty training sets are rejected") {
    auto X = gaussian_cloud(10, 1);
    DetectorSpec spec;
    spec.nu = 0.0;
    CHECK_THROWS_AS(ocsvm_fit(X, spec), DetectorError);
    spec.nu = 0.2;
    FeatureMatrix empty({"x", "y"}, 0);
    CHECK_THROWS_AS(ocsvm_fit(empty, spec), DetectorError);
}
