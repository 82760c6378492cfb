#include <doctest.h>

#include <cmath>
#include <vector>

#include "cps/empirical.hpp"
#include "cps/errors.hpp"
#include "cps/rng.hpp"

using namespace cps;

TEST_SUITE("empirical") {

TEST_CASE("equantile picks the ceil(n*tau) order statistic") {
    std::vector<double> v{5.0, 1.0, 3.0, 2.0, 4.0};
    empirical::SortedSample s(v);
    // ceil(5 * 0.5) = 3rd smallest
    CHECK(empirical::equantile(s, 0.5) == 3.0);
    // ceil(5 * 0.2) = 1st
    CHECK(empirical::equantile(s, 0.2) == 1.0);
    // ceil(5 * 0.21) = 2nd
    CHECK(empirical::equantile(s, 0.21) == 2.0);
    CHECK(empirical::equantile(s, 0.999) == 5.0);
    CHECK(empirical::equantile(s, 0.001) == 1.0);
}

TEST_CASE("equantile handles duplicates") {
    std::vector<double> v{1.0, 1.0, 1.0, 2.0};
    empirical::SortedSample s(v);
    CHECK(empirical::equantile(s, 0.5) == 1.0);   // 2nd of [1,1,1,2]
    CHECK(empirical::equantile(s, 0.76) == 2.0);  // ceil(3.04) = 4th
}

TEST_CASE("equantile rejects levels outside the open interval") {
    std::vector<double> v{1.0, 2.0};
    empirical::SortedSample s(v);
    CHECK_THROWS_AS(empirical::equantile(s, 0.0), domain_error);
    CHECK_THROWS_AS(empirical::equantile(s, 1.0), domain_error);
}

TEST_CASE("quantile_of matches equantile on random data") {
    Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v(37);
        for (double& t : v) t = rng.normal();
        empirical::SortedSample s(v);
        for (double tau : {0.1, 0.25, 0.5, 0.8, 0.95})
            CHECK(empirical::quantile_of(v, tau) == empirical::equantile(s, tau));
    }
}

TEST_CASE("ecdf counts closed-left") {
    std::vector<double> v{1.0, 2.0, 2.0, 3.0};
    empirical::SortedSample s(v);
    CHECK(empirical::ecdf(s, 0.5) == 0.0);
    CHECK(empirical::ecdf(s, 2.0) == doctest::Approx(0.75));
    CHECK(empirical::ecdf(s, 3.0) == 1.0);
}

TEST_CASE("psi includes the boundary") {
    CHECK(empirical::psi(0.3, 0.0) == doctest::Approx(0.3 - 1.0));
    CHECK(empirical::psi(0.3, -1.0) == doctest::Approx(-0.7));
    CHECK(empirical::psi(0.3, 1e-12) == doctest::Approx(0.3));
}

TEST_CASE("order_statistic is 1-based") {
    std::vector<double> v{9.0, 7.0, 8.0};
    CHECK(empirical::order_statistic(v, 1) == 7.0);
    CHECK(empirical::order_statistic(v, 3) == 9.0);
    CHECK_THROWS_AS(empirical::order_statistic(v, 0), domain_error);
    CHECK_THROWS_AS(empirical::order_statistic(v, 4), domain_error);
}

TEST_CASE("silverman bandwidth follows the plug-in rule") {
    // v = [0,1,2,3,4]: sd = sqrt(2.5), IQR via the order-statistic
    // convention = 3 - 1 = 2.
    std::vector<double> v{0.0, 1.0, 2.0, 3.0, 4.0};
    const double sd = std::sqrt(2.5);
    const double iqr = 2.0;
    const double expect =
        1.06 * std::min(sd, iqr / 1.34) * std::pow(5.0, -0.2);
    CHECK(empirical::silverman_bandwidth(v) == doctest::Approx(expect));
}

TEST_CASE("silverman bandwidth survives a collapsed spread measure") {
    // Three-quarters identical: IQR = 0 but sd > 0.
    std::vector<double> v{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 5.0};
    CHECK(empirical::silverman_bandwidth(v) > 0.0);
    std::vector<double> constant(6, 2.0);
    CHECK(empirical::silverman_bandwidth(constant) > 0.0);
}

TEST_CASE("nw_regress of a constant is the constant") {
    std::vector<double> x{-1.0, 0.0, 2.0, 5.0};
    std::vector<double> y(4, 3.25);
    CHECK(empirical::nw_regress(x, y, 1.0) == doctest::Approx(3.25));
}

TEST_CASE("nw_regress respects symmetry") {
    std::vector<double> x{0.0, 1.0};
    std::vector<double> y{0.0, 1.0};
    CHECK(empirical::nw_regress(x, y, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("nw_regress hand-checked three-point window") {
    // Weights at x0=1 with h=0.5: exp(-2) for the outer points, 1 for the
    // middle one, so the estimate is 1/(1 + 2 exp(-2)).
    std::vector<double> x{0.0, 1.0, 2.0};
    std::vector<double> y{0.0, 1.0, 0.0};
    const double expect = 1.0 / (1.0 + 2.0 * std::exp(-2.0));
    CHECK(empirical::nw_regress(x, y, 1.0, empirical::KernelConfig::fixed(0.5)) ==
          doctest::Approx(expect).epsilon(1e-9));
    CHECK(expect == doctest::Approx(0.786986).epsilon(1e-5));
}

TEST_CASE("nw_weights throw when every weight underflows") {
    std::vector<double> x{0.0, 1e-9};
    CHECK_THROWS_AS(
        empirical::nw_weights(x, 1e9, empirical::KernelConfig::fixed(1e-3)),
        degenerate_window_error);
}

TEST_CASE("kde_at_zero is positive and scales like a density") {
    Rng rng(7);
    std::vector<double> r(500);
    for (double& t : r) t = rng.normal();
    const double f0 = empirical::kde_at_zero(r);
    // Standard normal density at zero is about 0.3989.
    CHECK(f0 > 0.25);
    CHECK(f0 < 0.55);
}

TEST_CASE("fixed bandwidth config round-trips") {
    auto cfg = empirical::KernelConfig::fixed(0.7);
    CHECK(cfg.bandwidth == 0.7);
    CHECK_FALSE(cfg.is_auto());
    CHECK(empirical::KernelConfig::automatic().is_auto());
}

}
