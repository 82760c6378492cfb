#include "cps/evaluation.hpp"

#include <cmath>
#include <numeric>

#include "cps/errors.hpp"
#include "cps/quantreg.hpp"
#include "cps/rng.hpp"

namespace cps::evaluation {

namespace {

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                        bool& ridge_used) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() == Z.cols()) {
        Eigen::VectorXd beta = qr.solve(y);
        if (beta.allFinite()) return beta;
    }
    Eigen::MatrixXd gram = Z.transpose() * Z;
    Eigen::VectorXd rhs = Z.transpose() * y;
    double base = gram.trace() / static_cast<double>(Z.cols());
    if (!(base > 0.0)) base = 1.0;
    double lambda = 1e-8 * base;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd M = gram;
        M.diagonal().array() += lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd beta = ldlt.solve(rhs);
            if (beta.allFinite()) {
                ridge_used = true;
                return beta;
            }
        }
        lambda *= 100.0;
    }
    throw singular_design_error("least-squares design stayed singular");
}

} // namespace

PredictionErrorReport prediction_error(std::span<const double> y,
                                       const Eigen::MatrixXd& X,
                                       const std::vector<std::size_t>& selected,
                                       const PartitionConfig& cfg) {
    const std::size_t n = y.size();
    if (static_cast<std::size_t>(X.rows()) != n)
        throw domain_error("response and covariate matrix lengths differ");
    if (cfg.partitions < 1) throw domain_error("need at least one partition");
    if (!(cfg.train_fraction > 0.0) || !(cfg.train_fraction < 1.0))
        throw domain_error("training fraction must lie inside (0, 1)");
    for (std::size_t j : selected)
        if (j >= static_cast<std::size_t>(X.cols()))
            throw domain_error("selected column index out of range");

    const std::size_t q = selected.size() + 1;
    const std::size_t train_size = static_cast<std::size_t>(
        std::floor(cfg.train_fraction * static_cast<double>(n)));
    if (train_size <= q)
        throw insufficient_data_error(
            "training part too small for the selected columns");
    if (train_size >= n)
        throw insufficient_data_error("no rows left for the test part");

    Eigen::MatrixXd Zfull(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(q));
    Zfull.col(0).setOnes();
    for (std::size_t k = 0; k < selected.size(); ++k)
        Zfull.col(static_cast<Eigen::Index>(k) + 1) =
            X.col(static_cast<Eigen::Index>(selected[k]));

    PredictionErrorReport report;
    report.partitions = cfg.partitions;
    report.train_size = train_size;
    report.pe_quantile_per_partition.resize(cfg.partitions);
    report.pe_ols_per_partition.resize(cfg.partitions);

    std::vector<std::size_t> order(n);
    Eigen::MatrixXd Ztr(static_cast<Eigen::Index>(train_size),
                        static_cast<Eigen::Index>(q));
    Eigen::VectorXd ytr(static_cast<Eigen::Index>(train_size));

    for (std::size_t part = 0; part < cfg.partitions; ++part) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(part)));
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
            std::swap(order[i], order[j]);
        }

        for (std::size_t i = 0; i < train_size; ++i) {
            Ztr.row(static_cast<Eigen::Index>(i)) =
                Zfull.row(static_cast<Eigen::Index>(order[i]));
            ytr[static_cast<Eigen::Index>(i)] = y[order[i]];
        }

        quantreg::QuantRegFit med_fit = quantreg::fit(Ztr, ytr, 0.5);
        if (med_fit.ridge_used) report.ridge_used = true;
        bool ols_ridge = false;
        Eigen::VectorXd ols_beta = ols_fit(Ztr, ytr, ols_ridge);
        if (ols_ridge) report.ridge_used = true;

        double sq_med = 0.0;
        double sq_ols = 0.0;
        const std::size_t test_size = n - train_size;
        for (std::size_t i = train_size; i < n; ++i) {
            Eigen::Index r = static_cast<Eigen::Index>(order[i]);
            double truth = y[order[i]];
            double pred_med = Zfull.row(r).dot(med_fit.coefficients);
            double pred_ols = Zfull.row(r).dot(ols_beta);
            sq_med += (truth - pred_med) * (truth - pred_med);
            sq_ols += (truth - pred_ols) * (truth - pred_ols);
        }
        report.pe_quantile_per_partition[part] =
            sq_med / static_cast<double>(test_size);
        report.pe_ols_per_partition[part] =
            sq_ols / static_cast<double>(test_size);
    }

    double sum_med = 0.0;
    double sum_ols = 0.0;
    for (std::size_t part = 0; part < cfg.partitions; ++part) {
        sum_med += report.pe_quantile_per_partition[part];
        sum_ols += report.pe_ols_per_partition[part];
    }
    report.pe_quantile = sum_med / static_cast<double>(cfg.partitions);
    report.pe_ols = sum_ols / static_cast<double>(cfg.partitions);
    return report;
}

} // namespace cps::evaluation
