#include <doctest.h>

#include <algorithm>
#include <span>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "cps/errors.hpp"
#include "cps/rng.hpp"
#include "cps/screening.hpp"
#include "cps/stats.hpp"

using namespace cps;
using screening::ScreeningConfig;
using screening::ThresholdMode;

namespace {

struct Planted {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
};

// Three strong signal columns up front, noise after them.
Planted planted_signal(Rng& rng, int n, int p) {
    Planted d;
    d.y.resize(n);
    d.X.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
    for (int i = 0; i < n; ++i)
        d.y[i] = 2.0 * d.X(i, 0) - 1.5 * d.X(i, 1) + d.X(i, 2) +
                 0.3 * rng.normal();
    return d;
}

std::span<const double> sp(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

bool is_permutation_of_columns(const std::vector<std::size_t>& ranking,
                               std::size_t p) {
    if (ranking.size() != p) return false;
    std::vector<std::size_t> sorted = ranking;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < p; ++j)
        if (sorted[j] != j) return false;
    return true;
}

} // namespace

TEST_SUITE("screening") {

TEST_CASE("model-size defaults follow the log-ratio rule") {
    CHECK(screening::default_dn(200) == 37);
    CHECK(screening::default_dn(120) == 25);
    CHECK(screening::default_dstar(200) == 12);
    CHECK(screening::default_dstar(100) == 9);
}

TEST_CASE("false-discovery threshold matches the normal quantile") {
    const double delta = screening::fdr_threshold(1000, 10.0);
    CHECK(delta == doctest::Approx(2.575829).epsilon(1e-5));
    CHECK(screening::fdr_threshold(100, 1.0) ==
          doctest::Approx(stats::norm_quantile(1.0 - 1.0 / 200.0)).epsilon(1e-12));
    CHECK_THROWS_AS(screening::fdr_threshold(100, 0.5), domain_error);
    CHECK_THROWS_AS(screening::fdr_threshold(100, 200.0), domain_error);
}

TEST_CASE("marginal screening ranks planted signals first") {
    Rng rng(111);
    auto d = planted_signal(rng, 200, 60);
    ScreeningConfig cfg;
    cfg.pair = {0.5, 0.5};
    auto res = screening::cc_sis(sp(d.y), d.X, cfg);
    REQUIRE(is_permutation_of_columns(res.ranking, 60));
    std::vector<std::size_t> top(res.ranking.begin(), res.ranking.begin() + 3);
    std::sort(top.begin(), top.end());
    CHECK(top == std::vector<std::size_t>{0, 1, 2});
    CHECK(res.selected.size() == static_cast<std::size_t>(screening::default_dn(200)));
    // Selected set is the ranking prefix under the default mode.
    for (std::size_t k = 0; k < res.selected.size(); ++k)
        CHECK(res.selected[k] == res.ranking[k]);
}

TEST_CASE("ties break toward the lower column index") {
    Rng rng(113);
    const int n = 150;
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, 5);
    for (int i = 0; i < n; ++i) {
        y[i] = rng.normal();
        X(i, 0) = rng.normal();
        X(i, 1) = 0.9 * y[i] + 0.2 * rng.normal();
        X(i, 2) = X(i, 1);  // exact duplicate: identical utility
        X(i, 3) = rng.normal();
        X(i, 4) = rng.normal();
    }
    ScreeningConfig cfg;
    auto res = screening::cc_sis(sp(y), X, cfg);
    CHECK(res.utilities[1] == res.utilities[2]);
    auto pos1 = std::find(res.ranking.begin(), res.ranking.end(), 1u);
    auto pos2 = std::find(res.ranking.begin(), res.ranking.end(), 2u);
    CHECK(pos1 < pos2);
}

TEST_CASE("absolute mode keeps only utilities above the cut") {
    Rng rng(127);
    auto d = planted_signal(rng, 150, 30);
    ScreeningConfig cfg;
    cfg.mode = ThresholdMode::absolute;
    cfg.nu_n = 0.4;
    auto res = screening::cc_sis(sp(d.y), d.X, cfg);
    for (auto j : res.selected) CHECK(res.utilities[j] >= 0.4);
    for (std::size_t j = 0; j < 30; ++j) {
        const bool in = std::find(res.selected.begin(), res.selected.end(), j) !=
                        res.selected.end();
        CHECK(in == (res.utilities[j] >= 0.4));
    }
    CHECK(res.threshold_used == doctest::Approx(0.4));
}

TEST_CASE("data-driven threshold mode controls the selected count") {
    Rng rng(131);
    const int n = 200, p = 400;
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
        y[i] = rng.normal();
        for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    }
    ScreeningConfig cfg;
    cfg.mode = ThresholdMode::fdr;
    cfg.dbar_n = 5.0;
    auto res = screening::cc_sis(sp(y), X, cfg);
    // Pure noise: the bound keeps the haul near the nominal budget.
    CHECK(res.selected.size() <= 25);
}

TEST_CASE("rank-based baselines refuse the variance-driven mode") {
    Rng rng(137);
    auto d = planted_signal(rng, 100, 10);
    ScreeningConfig cfg;
    cfg.mode = ThresholdMode::fdr;
    CHECK_THROWS_AS(screening::pearson_sis(sp(d.y), d.X, cfg), domain_error);
    CHECK_THROWS_AS(screening::kendall_sis(sp(d.y), d.X, cfg), domain_error);
}

TEST_CASE("baseline rankings also find strong linear signals") {
    Rng rng(139);
    auto d = planted_signal(rng, 200, 40);
    ScreeningConfig cfg;
    auto pe = screening::pearson_sis(sp(d.y), d.X, cfg);
    auto ke = screening::kendall_sis(sp(d.y), d.X, cfg);
    for (auto* res : {&pe, &ke}) {
        std::vector<std::size_t> top(res->ranking.begin(),
                                     res->ranking.begin() + 3);
        std::sort(top.begin(), top.end());
        CHECK(top == std::vector<std::size_t>{0, 1, 2});
    }
}

TEST_CASE("iterative self-conditioning recovers planted signals") {
    Rng rng(149);
    auto d = planted_signal(rng, 120, 40);
    ScreeningConfig cfg;
    auto res = screening::cpc_sis_case1(sp(d.y), d.X, cfg);
    REQUIRE(is_permutation_of_columns(res.ranking, 40));
    std::vector<std::size_t> top(res.ranking.begin(), res.ranking.begin() + 3);
    std::sort(top.begin(), top.end());
    CHECK(top == std::vector<std::size_t>{0, 1, 2});

    // Step log coherence: iterations count up, chosen indices are valid
    // and never repeat.
    REQUIRE(!res.per_step_log.empty());
    std::vector<char> seen(40, 0);
    for (std::size_t k = 0; k < res.per_step_log.size(); ++k) {
        const auto& step = res.per_step_log[k];
        CHECK(step.iteration == k + 1);
        REQUIRE(step.chosen < 40);
        CHECK(!seen[step.chosen]);
        seen[step.chosen] = 1;
    }
    CHECK(res.selected.size() ==
          static_cast<std::size_t>(screening::default_dn(120)));
    for (std::size_t k = 0; k < res.selected.size(); ++k)
        CHECK(res.selected[k] == res.ranking[k]);
}

TEST_CASE("externally conditioned variants accept a side design") {
    Rng rng(151);
    const int n = 150, p = 30, r = 2;
    Eigen::MatrixXd W(n, r), X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < r; ++j) W(i, j) = rng.normal();
        for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
        y[i] = W(i, 0) + 1.8 * X(i, 0) - 1.2 * X(i, 1) + 0.4 * rng.normal();
    }
    ScreeningConfig cfg;
    auto r2 = screening::cpc_sis_case2(sp(y), X, W, cfg);
    std::vector<std::size_t> top2(r2.ranking.begin(), r2.ranking.begin() + 2);
    std::sort(top2.begin(), top2.end());
    CHECK(top2 == std::vector<std::size_t>{0, 1});

    auto r3 = screening::cpc_sis_case3(sp(y), X, W, cfg);
    REQUIRE(is_permutation_of_columns(r3.ranking, p));
    std::vector<std::size_t> top3(r3.ranking.begin(), r3.ranking.begin() + 2);
    std::sort(top3.begin(), top3.end());
    CHECK(top3 == std::vector<std::size_t>{0, 1});
    REQUIRE(!r3.per_step_log.empty());
    for (std::size_t k = 0; k < r3.per_step_log.size(); ++k)
        CHECK(r3.per_step_log[k].iteration == k + 1);
}

TEST_CASE("iterative modes need a workable sample size") {
    Rng rng(157);
    auto d = planted_signal(rng, 20, 10);
    ScreeningConfig cfg;
    CHECK_THROWS_AS(screening::cpc_sis_case1(sp(d.y), d.X, cfg),
                    insufficient_data_error);
}

TEST_CASE("results do not depend on the thread count") {
    Rng rng(163);
    auto d = planted_signal(rng, 150, 80);
    ScreeningConfig cfg1;
    cfg1.threads = 1;
    ScreeningConfig cfg4;
    cfg4.threads = 4;
    auto a = screening::cc_sis(sp(d.y), d.X, cfg1);
    auto b = screening::cc_sis(sp(d.y), d.X, cfg4);
    CHECK(a.ranking == b.ranking);
    for (std::size_t j = 0; j < a.utilities.size(); ++j)
        CHECK(a.utilities[j] == b.utilities[j]);

    auto c1 = screening::cpc_sis_case1(sp(d.y), d.X, cfg1);
    auto c4 = screening::cpc_sis_case1(sp(d.y), d.X, cfg4);
    CHECK(c1.ranking == c4.ranking);
    CHECK(c1.selected == c4.selected);
}

}
