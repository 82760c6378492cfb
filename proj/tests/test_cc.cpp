#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cps/cc.hpp"
#include "cps/errors.hpp"
#include "cps/rng.hpp"
#include "cps/stats.hpp"
#include "oracles.hpp"

using namespace cps;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& t : v) t = rng.normal();
    return v;
}

} // namespace

TEST_SUITE("cc") {

TEST_CASE("matches the brute-force implementation") {
    Rng rng(101);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 4 + static_cast<std::size_t>(rep % 9);
        auto y = draw(rng, n);
        auto x = draw(rng, n);
        if (rep % 3 == 0)
            for (double& t : x) t = std::round(t);  // force ties
        for (auto [tau, iota] : {std::pair{0.5, 0.5}, {0.25, 0.75}, {0.1, 0.9}}) {
            auto est = cc::estimate(y, x, {tau, iota});
            const double ref = oracles::brute_force_cc(y, x, tau, iota);
            CHECK(std::abs(est.value - ref) <= 1e-14);
        }
    }
}

TEST_CASE("perfect positive dependence at the median") {
    Rng rng(7);
    auto y = draw(rng, 100);
    auto est = cc::estimate(y, y, {0.5, 0.5});
    CHECK(est.value == doctest::Approx(1.0));
}

TEST_CASE("argument symmetry swaps the levels") {
    Rng rng(13);
    auto y = draw(rng, 51);
    auto x = draw(rng, 51);
    auto a = cc::estimate(y, x, {0.3, 0.7});
    auto b = cc::estimate(x, y, {0.7, 0.3});
    // identical up to multiplication-order rounding in the normalizer
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-13));
}

TEST_CASE("invariant under strictly increasing transforms") {
    Rng rng(17);
    auto y = draw(rng, 80);
    auto x = draw(rng, 80);
    auto base = cc::estimate(y, x, {0.4, 0.6});
    auto ty = y;
    for (double& t : ty) t = std::exp(t);
    auto tx = x;
    for (double& t : tx) t = t * t * t;
    auto moved = cc::estimate(ty, tx, {0.4, 0.6});
    CHECK(base.value == moved.value);
}

TEST_CASE("independent samples give a small value") {
    Rng rng(19);
    auto y = draw(rng, 4000);
    auto x = draw(rng, 4000);
    auto est = cc::estimate(y, x, {0.5, 0.5});
    CHECK(std::abs(est.value) < 0.08);
}

TEST_CASE("estimation accepts extreme levels but inference clamps them") {
    Rng rng(23);
    auto y = draw(rng, 400);
    auto x = draw(rng, 400);
    CHECK_NOTHROW(cc::estimate(y, x, {0.01, 0.99}));
    const double clamped = cc::variance(y, x, {0.05, 0.5});
    const double wild = cc::variance(y, x, {0.01, 0.5});
    CHECK(clamped == wild);
}

TEST_CASE("rejects degenerate inputs") {
    std::vector<double> y{1.0, 2.0};
    std::vector<double> x{1.0};
    CHECK_THROWS_AS(cc::estimate(y, x, {0.5, 0.5}), domain_error);
    std::vector<double> y1{1.0};
    std::vector<double> x1{2.0};
    CHECK_THROWS_AS(cc::estimate(y1, x1, {0.5, 0.5}),
                    insufficient_data_error);
    CHECK_THROWS_AS(cc::estimate(y, y, {0.0, 0.5}), domain_error);
    CHECK_THROWS_AS(cc::estimate(y, y, {0.5, 1.0}), domain_error);
}

TEST_CASE("variance matches the closed-form moment identity") {
    Rng rng(29);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 60 + static_cast<std::size_t>(rep) * 7;
        auto y = draw(rng, n);
        auto x = draw(rng, n);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = 0.6 * y[i] + 0.8 * x[i];
        for (auto [tau, iota] : {std::pair{0.5, 0.5}, {0.3, 0.7}}) {
            const double direct = cc::variance(y, x, {tau, iota});
            const double closed =
                oracles::closed_form_cc_variance(y, x, tau, iota);
            CHECK(direct == doctest::Approx(closed).epsilon(1e-10));
        }
    }
}

TEST_CASE("paired-difference variance matches its moment identity") {
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 150;
        auto y = draw(rng, n);
        auto x1 = draw(rng, n);
        auto x2 = draw(rng, n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] += 0.5 * y[i];
            x2[i] += 0.5 * y[i] + 0.2 * x1[i];
        }
        const double tau = 0.5, iota = 0.5;
        auto res = cc::test_equal(y, x1, x2, {tau, iota});
        const double o1 = oracles::closed_form_cc_variance(y, x1, tau, iota);
        const double o2 = oracles::closed_form_cc_variance(y, x2, tau, iota);
        const double a12 =
            oracles::closed_form_cc_crosscov(y, x1, x2, tau, iota);
        CHECK(res.xi == doctest::Approx(o1 + o2 - 2.0 * a12).epsilon(1e-9));
    }
}

TEST_CASE("zero test flags strong dependence and spares independence") {
    Rng rng(37);
    auto y = draw(rng, 500);
    auto x = y;
    for (double& t : x) t = 0.9 * t;
    auto dependent = cc::test_zero(y, x, {0.5, 0.5});
    CHECK(dependent.p_value < 1e-6);
    auto z = draw(rng, 500);
    auto independent = cc::test_zero(y, z, {0.5, 0.5});
    CHECK(independent.p_value > 0.001);
    CHECK(independent.p_value <= 1.0);
}

TEST_CASE("equality test on identical columns degenerates") {
    Rng rng(41);
    auto y = draw(rng, 100);
    auto x = draw(rng, 100);
    CHECK_THROWS_AS(cc::test_equal(y, x, x, {0.5, 0.5}),
                    degenerate_variance_error);
}

TEST_CASE("equality test is antisymmetric in the pair order") {
    Rng rng(43);
    auto y = draw(rng, 180);
    auto x1 = draw(rng, 180);
    auto x2 = draw(rng, 180);
    for (std::size_t i = 0; i < 180; ++i) x1[i] += y[i];
    auto ab = cc::test_equal(y, x1, x2, {0.5, 0.5});
    auto ba = cc::test_equal(y, x2, x1, {0.5, 0.5});
    CHECK(ab.delta == doctest::Approx(-ba.delta));
    CHECK(ab.xi == doctest::Approx(ba.xi));
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
}

TEST_CASE("offdiag covariance is symmetric in its pairs") {
    Rng rng(47);
    auto y = draw(rng, 220);
    auto x = draw(rng, 220);
    for (std::size_t i = 0; i < 220; ++i) x[i] += 0.4 * y[i];
    const double ab = cc::offdiag_cov(y, x, {0.3, 0.3}, {0.7, 0.7});
    const double ba = cc::offdiag_cov(y, x, {0.7, 0.7}, {0.3, 0.3});
    CHECK(ab == doctest::Approx(ba));
    const double diag = cc::offdiag_cov(y, x, {0.5, 0.5}, {0.5, 0.5});
    CHECK(diag == doctest::Approx(cc::variance(y, x, {0.5, 0.5})));
}

}
