#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "shield/featsel.hpp"
#include "shield/rng.hpp"

using namespace shield;

namespace {

FeatureMatrix matrix(const std::vector<std::vector<double>>& cols,
                     std::vector<std::string> names = {}) {
    if (names.empty())
        for (std::size_t c = 0; c < cols.size(); ++c) names.push_back("f" + std::to_string(c));
    FeatureMatrix m(names, cols[0].size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < cols[c].size(); ++r) m.at(r, c) = cols[c][r];
    return m;
}

// Independent two-group F oracle written directly from the sums of squares.
double f_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    double ma = mean(a), mb = mean(b);
    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    double m = mean(all);
    double ssb = a.size() * (ma - m) * (ma - m) + b.size() * (mb - m) * (mb - m);
    double ssw = 0;
    for (double x : a) ssw += (x - ma) * (x - ma);
    for (double x : b) ssw += (x - mb) * (x - mb);
    double msw = ssw / static_cast<double>(all.size() - 2);
    if (msw > 0) return ssb / msw;
    return ssb > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

TEST_CASE("anova hand oracle: groups [1,2,3] vs [4,5,6] give F = 13.5") {
    auto X = matrix({{1, 2, 3, 4, 5, 6}});
    std::vector<int> y = {0, 0, 0, 1, 1, 1};
    auto table = anova_f(X, y);
    CHECK(table.entries[0].score == Catch::Approx(13.5).epsilon(1e-12));
    CHECK(table.entries[0].score ==
          Catch::Approx(f_oracle({1, 2, 3}, {4, 5, 6})).epsilon(1e-12));
}

TEST_CASE("anova is zero for identical group means") {
    auto X = matrix({{1, 3, 1, 3}});
    std::vector<int> y = {0, 0, 1, 1};
    CHECK(anova_f(X, y).entries[0].score == 0.0);
}

TEST_CASE("anova infinity sentinel for zero within-group variance") {
    auto X = matrix({{1, 1, 2, 2}});
    std::vector<int> y = {0, 0, 1, 1};
    CHECK(std::isinf(anova_f(X, y).entries[0].score));
}

TEST_CASE("anova rejects single-class labels") {
    auto X = matrix({{1, 2, 3}});
    CHECK_THROWS_AS(anova_f(X, {0, 0, 0}), DataError);
}

TEST_CASE("anova is invariant under affine feature transforms") {
    CounterRng rng(5);
    std::vector<double> col(40);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = i % 2;
        col[i] = rng.gaussian() + y[i];
    }
    std::vector<double> affine;
    for (double v : col) affine.push_back(-3.5 * v + 11.0);
    auto f1 = anova_f(matrix({col}), y).entries[0].score;
    auto f2 = anova_f(matrix({affine}), y).entries[0].score;
    CHECK(f1 == Catch::Approx(f2).epsilon(1e-9));
}

TEST_CASE("anova matches the brute-force oracle on random fixtures") {
    CounterRng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 6 + rng.uniform_index(30);
        std::vector<double> col(n);
        std::vector<int> y(n);
        std::vector<double> g0, g1;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = i < 3 ? i % 2 : static_cast<int>(rng.uniform_index(2));  // both classes present
            col[i] = rng.gaussian(y[i], 1.0);
            (y[i] == 0 ? g0 : g1).push_back(col[i]);
        }
        auto f = anova_f(matrix({col}), y).entries[0].score;
        CHECK(f == Catch::Approx(f_oracle(g0, g1)).epsilon(1e-9));
    }
}

TEST_CASE("mutual information of perfect balanced dependence is ln 2") {
    std::size_t n = 100;
    std::vector<double> col(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        col[i] = static_cast<double>(i);
        y[i] = i < n / 2 ? 0 : 1;  // y = 1{x > median}, balanced
    }
    auto mi = mutual_info(matrix({col}), y, 2).entries[0].score;
    CHECK(mi == Catch::Approx(std::log(2.0)).margin(1e-9));
}

TEST_CASE("constant features have zero mutual information") {
    std::vector<double> col(50, 7.0);
    std::vector<int> y(50);
    for (std::size_t i = 0; i < 50; ++i) y[i] = i % 2;
    CHECK(mutual_info(matrix({col}), y, 10).entries[0].score == 0.0);
}

TEST_CASE("independent features score near-zero mutual information") {
    CounterRng rng(13);
    std::size_t n = 10000;
    std::vector<double> col(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        col[i] = rng.gaussian();
        y[i] = static_cast<int>(rng.uniform_index(2));
    }
    CHECK(mutual_info(matrix({col}), y, 10).entries[0].score <= 0.05);
}

TEST_CASE("mutual information is invariant under monotone transforms") {
    CounterRng rng(17);
    std::size_t n = 500;
    std::vector<double> col(n), cubed(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        col[i] = rng.gaussian();
        cubed[i] = col[i] * col[i] * col[i];
        y[i] = col[i] > 0 ? 1 : 0;
    }
    auto m1 = mutual_info(matrix({col}), y, 10).entries[0].score;
    auto m2 = mutual_info(matrix({cubed}), y, 10).entries[0].score;
    CHECK(m1 == Catch::Approx(m2).margin(1e-12));
}

TEST_CASE("rfe keeps everything when k_target equals the feature count") {
    auto X = matrix({{1, 2, 3, 4}, {4, 3, 2, 1}});
    std::vector<int> y = {0, 0, 1, 1};
    auto table = rfe_select(X, y, 2);
    for (const auto& e : table.entries) CHECK(e.selected);
}

TEST_CASE("rfe rejects invalid targets") {
    auto X = matrix({{1, 2, 3, 4}});
    std::vector<int> y = {0, 0, 1, 1};
    CHECK_THROWS_AS(rfe_select(X, y, 0), DataError);
    CHECK_THROWS_AS(rfe_select(X, y, 5), DataError);
}

TEST_CASE("rfe retains the predictive feature among noise") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CounterRng rng(seed);
        std::size_t n = 200;
        std::vector<std::vector<double>> cols(10, std::vector<double>(n));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rng.uniform_index(2));
            cols[0][i] = rng.gaussian(2.0 * y[i], 0.5);  // predictive
            for (std::size_t c = 1; c < 10; ++c) cols[c][i] = rng.gaussian();
        }
        auto table = rfe_select(matrix(cols), y, 1);
        if (table.entries[0].selected) ++wins;
    }
    CHECK(wins >= 18);
}

TEST_CASE("rfe never drops both copies of a duplicated predictive feature") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CounterRng rng(100 + seed);
        std::size_t n = 200;
        std::vector<std::vector<double>> cols(6, std::vector<double>(n));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rng.uniform_index(2));
            cols[0][i] = rng.gaussian(2.0 * y[i], 0.5);
            cols[1][i] = cols[0][i];  // exact duplicate
            for (std::size_t c = 2; c < 6; ++c) cols[c][i] = rng.gaussian();
        }
        auto table = rfe_select(matrix(cols), y, 2);
        int kept = (table.entries[0].selected ? 1 : 0) + (table.entries[1].selected ? 1 : 0);
        CHECK(kept >= 1);
    }
}

TEST_CASE("union keeps original column order") {
    auto make = [](std::vector<bool> sel) {
        FeatureScoreTable t;
        const char* names[] = {"a", "b", "c", "d"};
        for (std::size_t i = 0; i < 4; ++i) t.entries.push_back({names[i], 0.0, sel[i]});
        return t;
    };
    auto out = union_select({make({true, true, false, false}), make({false, true, true, false}),
                             make({false, false, true, true})});
    CHECK(out == std::vector<std::string>{"a", "b", "c", "d"});
    auto same = union_select({make({true, false, true, false}), make({true, false, true, false})});
    CHECK(same == std::vector<std::string>{"a", "c"});
}

TEST_CASE("empty selections and empty table lists are errors") {
    FeatureScoreTable t;
    t.entries.push_back({"a", 1.0, false});
    CHECK_THROWS_AS(union_select({t}), DataError);
    CHECK_THROWS_AS(union_select({}), DataError);
}

TEST_CASE("mark_top_k ranks infinity above all finite scores") {
    FeatureScoreTable t;
    t.entries.push_back({"a", 5.0, false});
    t.entries.push_back({"b", std::numeric_limits<double>::infinity(), false});
    t.entries.push_back({"c", 90.0, false});
    mark_top_k(t, 1);
    CHECK_FALSE(t.entries[0].selected);
    CHECK(t.entries[1].selected);
    CHECK_FALSE(t.entries[2].selected);
}

TEST_CASE("score CSV serializes the infinity sentinel as inf") {
    FeatureScoreTable t;
    t.method = SelectionMethod::ANOVA_F;
    t.entries.push_back({"a", std::numeric_limits<double>::infinity(), true});
    auto path = std::filesystem::temp_directory_path() / "scores_test.csv";
    write_score_csv(path.string(), {t});
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    std::filesystem::remove(path);
    CHECK(text.find("a,anova_f,inf,1") != std::string::npos);
}
