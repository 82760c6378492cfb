#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cps::evaluation {

struct PartitionConfig {
    std::size_t partitions = 500;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
};

struct PredictionErrorReport {
    double pe_quantile = 0.0;  // median-regression fit, mean squared test error
    double pe_ols = 0.0;       // least-squares fit, mean squared test error
    std::size_t partitions = 0;
    std::size_t train_size = 0;
    std::vector<double> pe_quantile_per_partition;
    std::vector<double> pe_ols_per_partition;
    bool ridge_used = false;
};

// Repeated random train/test splits. On each training part a median
// regression and an ordinary least-squares fit of y on the selected columns
// (plus an intercept) are computed and both are scored by squared error on
// the held-out part. An empty selection scores intercept-only models.
PredictionErrorReport prediction_error(std::span<const double> y,
                                       const Eigen::MatrixXd& X,
                                       const std::vector<std::size_t>& selected,
                                       const PartitionConfig& cfg = {});

} // namespace cps::evaluation
