#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shield/detectors/isoforest.hpp"
#include "shield/rng.hpp"

using namespace shield;

namespace {

FeatureMatrix gaussian_cloud(std::size_t n_inliers, std::size_t n_outliers, std::uint64_t seed) {
    CounterRng rng(seed);
    FeatureMatrix m({"x", "y"}, n_inliers + n_outliers);
    for (std::size_t r = 0; r < n_inliers; ++r) {
        m.at(r, 0) = rng.gaussian();
        m.at(r, 1) = rng.gaussian();
    }
    for (std::size_t r = n_inliers; r < n_inliers + n_outliers; ++r) {
        m.at(r, 0) = rng.gaussian(10.0, 0.5);
        m.at(r, 1) = rng.gaussian(10.0, 0.5);
    }
    return m;
}

}  // namespace

TEST_CASE("path-length adjustment constants") {
    CHECK(iso_c(1) == 0.0);
    CHECK(iso_c(0) == 0.0);
    CHECK(iso_c(2) == 1.0);  // 2*H(1) - 2*(1/2), H(1) = 1 exactly
    CHECK(iso_c(256) > 0.0);
    // c is increasing in n.
    CHECK(iso_c(3) > iso_c(2));
    CHECK(iso_c(100) > iso_c(10));
}

TEST_CASE("mean path length equal to c(psi) scores one half") {
    double c = iso_c(256);
    CHECK(std::pow(2.0, -c / c) == 0.5);
}

TEST_CASE("scores live in (0,1) and decrease in path length") {
    auto X = gaussian_cloud(400, 20, 1);
    DetectorSpec spec;
    spec.seed = 1;
    auto model = isoforest_fit(X, spec);
    auto scores = isoforest_score(model, X);
    for (double s : scores) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
    double norm = iso_c(model.subsample);
    // Invert the score back to E[h]; higher score must mean shorter path.
    for (std::size_t i = 1; i < scores.size(); ++i) {
        double ha = -std::log2(scores[i - 1]) * norm;
        double hb = -std::log2(scores[i]) * norm;
        if (scores[i - 1] > scores[i]) CHECK(ha < hb);
    }
}

TEST_CASE("outliers at 10 sigma outrank the inlier median") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::size_t n_in = 475, n_out = 25;
        auto X = gaussian_cloud(n_in, n_out, seed);
        DetectorSpec spec;
        spec.seed = seed;
        auto model = isoforest_fit(X, spec);
        auto scores = isoforest_score(model, X);
        std::vector<double> inlier(scores.begin(), scores.begin() + n_in);
        std::sort(inlier.begin(), inlier.end());
        double median = inlier[n_in / 2];
        bool all_above = true;
        for (std::size_t r = n_in; r < n_in + n_out; ++r)
            if (scores[r] <= median) all_above = false;
        if (all_above) ++wins;
    }
    CHECK(wins == 5);
}

TEST_CASE("contamination quota flags exactly round(c*n) rows") {
    auto X = gaussian_cloud(97, 3, 9);
    DetectorSpec spec;
    spec.contamination = 0.2;
    spec.seed = 9;
    auto model = isoforest_fit(X, spec);
    auto flags = isoforest_flags(model, isoforest_score(model, X));
    std::size_t flagged = 0;
    for (int f : flags) flagged += f;
    CHECK(flagged == 20);  // round(0.2 * 100)
}

TEST_CASE("subsample clips to the training size and height limit follows") {
    FeatureMatrix X({"x"}, 10);
    for (std::size_t r = 0; r < 10; ++r) X.at(r, 0) = static_cast<double>(r);
    DetectorSpec spec;
    spec.subsample = 256;
    auto model = isoforest_fit(X, spec);
    CHECK(model.subsample == 10);
    CHECK(model.height_limit == 4);  // ceil(log2 10)
}

TEST_CASE("fitting is deterministic per seed") {
    auto X = gaussian_cloud(200, 10, 4);
    DetectorSpec spec;
    spec.seed = 77;
    auto s1 = isoforest_score(isoforest_fit(X, spec), X);
    auto s2 = isoforest_score(isoforest_fit(X, spec), X);
    CHECK(s1 == s2);
    spec.seed = 78;
    auto s3 = isoforest_score(isoforest_fit(X, spec), X);
    CHECK(s1 != s3);
}

TEST_CASE("empty training set is rejected") {
    FeatureMatrix X({"x"}, 0);
    CHECK_THROWS_AS(isoforest_fit(X, DetectorSpec{}), DetectorError);
}
