#include <doctest.h>

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cps/errors.hpp"
#include "cps/evaluation.hpp"
#include "cps/rng.hpp"

using namespace cps;

namespace {

std::span<const double> sp(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("noiseless linear data scores near zero under both fits") {
    Rng rng(201);
    const int n = 120;
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) X(i, j) = rng.normal();
        y[i] = 1.0 + 2.0 * X(i, 0) - 0.5 * X(i, 2);
    }
    evaluation::PartitionConfig cfg;
    cfg.partitions = 40;
    auto rep = evaluation::prediction_error(sp(y), X, {0, 2}, cfg);
    CHECK(rep.pe_quantile < 1e-8);
    CHECK(rep.pe_ols < 1e-12);
    CHECK(rep.partitions == 40);
    CHECK(rep.pe_quantile_per_partition.size() == 40);
    CHECK(rep.pe_ols_per_partition.size() == 40);
    CHECK(rep.train_size == static_cast<std::size_t>(std::floor(0.8 * n)));
}

TEST_CASE("useful columns beat irrelevant ones") {
    Rng rng(203);
    const int n = 150;
    Eigen::MatrixXd X(n, 6);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 6; ++j) X(i, j) = rng.normal();
        y[i] = 2.0 * X(i, 0) + 0.3 * rng.normal();
    }
    evaluation::PartitionConfig cfg;
    cfg.partitions = 60;
    auto good = evaluation::prediction_error(sp(y), X, {0}, cfg);
    auto bad = evaluation::prediction_error(sp(y), X, {4}, cfg);
    CHECK(good.pe_ols < bad.pe_ols);
    CHECK(good.pe_quantile < bad.pe_quantile);
}

TEST_CASE("same seed reproduces, different seed varies") {
    Rng rng(207);
    const int n = 80;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y[i] = X(i, 1) + rng.normal();
    }
    evaluation::PartitionConfig cfg;
    cfg.partitions = 25;
    auto a = evaluation::prediction_error(sp(y), X, {1}, cfg);
    auto b = evaluation::prediction_error(sp(y), X, {1}, cfg);
    CHECK(a.pe_quantile == b.pe_quantile);
    CHECK(a.pe_ols == b.pe_ols);
    for (std::size_t k = 0; k < 25; ++k)
        CHECK(a.pe_ols_per_partition[k] == b.pe_ols_per_partition[k]);
    cfg.seed = 99;
    auto c = evaluation::prediction_error(sp(y), X, {1}, cfg);
    CHECK(a.pe_ols != c.pe_ols);
}

TEST_CASE("empty selection scores intercept-only models") {
    Rng rng(211);
    const int n = 90;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
        y[i] = 3.0 + rng.normal();
    }
    evaluation::PartitionConfig cfg;
    cfg.partitions = 20;
    auto rep = evaluation::prediction_error(sp(y), X, {}, cfg);
    CHECK(rep.pe_ols > 0.5);
    CHECK(rep.pe_ols < 2.0);
    CHECK(rep.pe_quantile > 0.5);
    CHECK(rep.pe_quantile < 2.0);
}

TEST_CASE("degenerate configurations are rejected") {
    Rng rng(213);
    const int n = 30;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y[i] = rng.normal();
    }
    evaluation::PartitionConfig tiny;
    tiny.partitions = 5;
    tiny.train_fraction = 0.1;  // 3 rows to fit 4 coefficients
    CHECK_THROWS_AS(evaluation::prediction_error(sp(y), X, {0, 1, 2}, tiny),
                    insufficient_data_error);

    evaluation::PartitionConfig cfg;
    cfg.partitions = 5;
    CHECK_THROWS_AS(evaluation::prediction_error(sp(y), X, {7}, cfg),
                    domain_error);
}

TEST_CASE("duplicate columns fall back to a ridge-stabilised fit") {
    Rng rng(217);
    const int n = 70;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = X(i, 0);
        y[i] = X(i, 0) + 0.2 * rng.normal();
    }
    evaluation::PartitionConfig cfg;
    cfg.partitions = 10;
    auto rep = evaluation::prediction_error(sp(y), X, {0, 1}, cfg);
    CHECK(rep.ridge_used);
    CHECK(rep.pe_ols < 0.5);
}

}
