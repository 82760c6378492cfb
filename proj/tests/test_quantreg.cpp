#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cps/empirical.hpp"
#include "cps/quantreg.hpp"
#include "cps/rng.hpp"
#include "oracles.hpp"

using namespace cps;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& cols) {
    Eigen::MatrixXd Z(cols.rows(), cols.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(cols.cols()) = cols;
    return Z;
}

} // namespace

TEST_SUITE("quantreg") {

TEST_CASE("intercept-only fit equals the empirical quantile") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 21 + rep;
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = rng.normal() * 3.0 + 1.0;
        Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
        for (double w : {0.1, 0.25, 0.5, 0.75, 0.9}) {
            auto fit = quantreg::fit(ones, y, w);
            std::vector<double> yv(y.data(), y.data() + n);
            CHECK(fit.coefficients[0] ==
                  doctest::Approx(empirical::quantile_of(yv, w)).epsilon(1e-12));
            CHECK(fit.converged);
        }
    }
}

TEST_CASE("recovers an exact linear median") {
    const int n = 80;
    Rng rng(11);
    Eigen::MatrixXd cols(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        cols(i, 0) = rng.normal();
        cols(i, 1) = rng.normal();
        y[i] = 2.0 + 1.5 * cols(i, 0) - 0.5 * cols(i, 1);
    }
    Eigen::MatrixXd Z = with_intercept(cols);
    auto fit = quantreg::fit(Z, y, 0.5);
    CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(fit.coefficients[1] == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(fit.coefficients[2] == doctest::Approx(-0.5).epsilon(1e-5));
    CHECK(fit.objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("fitted loss is no worse than nearby perturbations") {
    Rng rng(19);
    const int n = 120;
    Eigen::MatrixXd cols(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) cols(i, j) = rng.normal();
        y[i] = 1.0 + cols(i, 0) - 2.0 * cols(i, 1) + rng.normal();
    }
    Eigen::MatrixXd Z = with_intercept(cols);
    for (double w : {0.25, 0.5, 0.8}) {
        auto fit = quantreg::fit(Z, y, w);
        const double base = oracles::naive_check_loss(Z, y, fit.coefficients, w);
        CHECK(base == doctest::Approx(fit.objective).epsilon(1e-10));
        for (int j = 0; j < 4; ++j) {
            for (double step : {1e-3, -1e-3, 1e-2, -1e-2}) {
                Eigen::VectorXd beta = fit.coefficients;
                beta[j] += step;
                CHECK(oracles::naive_check_loss(Z, y, beta, w) >= base - 1e-9);
            }
        }
    }
}

TEST_CASE("score condition holds at the optimum") {
    // The raw score cannot vanish exactly: each of the up-to-q interpolated
    // rows carries a step of size |z|. Optimality still caps the total at
    // the q * max|z| granularity, far below what a sloppy fit would leave.
    Rng rng(29);
    const int n = 150;
    Eigen::MatrixXd cols(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) cols(i, j) = rng.normal();
        y[i] = cols(i, 0) + 0.3 * cols(i, 2) + rng.normal() * 0.7;
    }
    Eigen::MatrixXd Z = with_intercept(cols);
    const double zmax = Z.cwiseAbs().maxCoeff();
    for (double w : {0.3, 0.5, 0.7}) {
        auto fit = quantreg::fit(Z, y, w);
        Eigen::VectorXd score = Eigen::VectorXd::Zero(5);
        for (int i = 0; i < n; ++i)
            score += empirical::psi(w, fit.residuals[i]) * Z.row(i).transpose();
        CHECK(score.lpNorm<Eigen::Infinity>() <= 5.0 * zmax);
    }
}

TEST_CASE("residuals are consistent with the coefficients") {
    Rng rng(37);
    const int n = 40;
    Eigen::MatrixXd cols(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        cols(i, 0) = rng.normal();
        cols(i, 1) = rng.uniform01();
        y[i] = rng.normal();
    }
    Eigen::MatrixXd Z = with_intercept(cols);
    auto fit = quantreg::fit(Z, y, 0.4);
    Eigen::VectorXd expect = y - Z * fit.coefficients;
    CHECK((fit.residuals - expect).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("collinear designs fall back to ridge") {
    Rng rng(41);
    const int n = 60;
    Eigen::MatrixXd cols(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        cols(i, 0) = rng.normal();
        cols(i, 1) = cols(i, 0);  // exact duplicate
        y[i] = cols(i, 0) + rng.normal();
    }
    Eigen::MatrixXd Z = with_intercept(cols);
    auto fit = quantreg::fit(Z, y, 0.5);
    CHECK(fit.ridge_used);
    // The fitted values still solve the problem even if single
    // coefficients are not identified.
    Eigen::VectorXd score = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < n; ++i)
        score += empirical::psi(0.5, fit.residuals[i]) * Z.row(i).transpose();
    CHECK(score.lpNorm<Eigen::Infinity>() <= 3.0 * Z.cwiseAbs().maxCoeff());
}

TEST_CASE("asymmetric levels shift the fit the right way") {
    Rng rng(43);
    const int n = 200;
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    auto lo = quantreg::fit(ones, y, 0.1);
    auto mid = quantreg::fit(ones, y, 0.5);
    auto hi = quantreg::fit(ones, y, 0.9);
    CHECK(lo.coefficients[0] < mid.coefficients[0]);
    CHECK(mid.coefficients[0] < hi.coefficients[0]);
}

TEST_CASE("check_loss matches the naive sum") {
    Eigen::VectorXd r(4);
    r << 1.0, -2.0, 0.0, 3.0;
    // rho_w(u) = u * (w - 1{u<=0}); at w=0.3:
    // 0.3 + (-2)(0.3-1) + 0 + 0.9 = 0.3 + 1.4 + 0.9 = 2.6; mean = 0.65
    CHECK(quantreg::check_loss(r, 0.3) == doctest::Approx(0.65));
}

}
