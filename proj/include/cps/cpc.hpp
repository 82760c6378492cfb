#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "cps/cc.hpp"
#include "cps/empirical.hpp"
#include "cps/quantreg.hpp"

namespace cps::cpc {

using cc::QuantilePair;

// Design matrix for the conditioning variables. The first column is always
// an all-ones intercept; callers build designs through the factories below.
struct ConditioningDesign {
    Eigen::MatrixXd Z;

    std::size_t n() const { return static_cast<std::size_t>(Z.rows()); }
    std::size_t q() const { return static_cast<std::size_t>(Z.cols()); }

    // Intercept column only; reduces the estimator to its unconditional form.
    static ConditioningDesign constant_only(std::size_t n);

    // Intercept plus the columns of W.
    static ConditioningDesign external(const Eigen::MatrixXd& W);

    // Intercept plus selected columns of X.
    static ConditioningDesign covariate_subset(const Eigen::MatrixXd& X,
                                               std::span<const std::size_t> idx);

    // Intercept, the columns of W, then selected columns of X.
    static ConditioningDesign mixed(const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& X,
                                    std::span<const std::size_t> idx);

    void validate() const;  // throws domain_error without a leading intercept
};

struct CpcEstimate {
    double value = 0.0;
    QuantilePair pair;
    std::size_t n = 0;
    quantreg::QuantRegFit y_fit;
    quantreg::QuantRegFit x_fit;
};

struct InfluencePieces {
    Eigen::VectorXd zeta;  // per-observation influence values
    Eigen::VectorXd d;     // y-side plug-in coefficient vector
    Eigen::VectorXd e;     // x-side plug-in coefficient vector
};

struct TestResult {
    CpcEstimate estimate;
    double omega = 0.0;  // variance of the influence values
    double z = 0.0;
    double p_value = 1.0;
};

struct EqualTestResult {
    CpcEstimate first;
    CpcEstimate second;
    double delta = 0.0;
    double xi = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

// Conditional quantile-threshold correlation of (y, x) given the design.
// Both marginal quantile regressions are fit here; residual signs at zero
// count as non-positive.
CpcEstimate estimate(std::span<const double> y, std::span<const double> x,
                     const ConditioningDesign& design, QuantilePair pair,
                     const quantreg::FitOptions& fit = {});

// Same, reusing a response-side fit shared across covariates.
CpcEstimate estimate_with_y_fit(const quantreg::QuantRegFit& y_fit,
                                std::span<const double> x,
                                const ConditioningDesign& design,
                                QuantilePair pair,
                                const quantreg::FitOptions& fit = {});

// Influence values for an estimate, with the plug-in coefficient vectors
// obtained from kernel estimates at residual zero.
InfluencePieces influence(const ConditioningDesign& design,
                          const CpcEstimate& est,
                          const empirical::KernelConfig& kernel = {});

// Asymptotic variance of sqrt(n) * (estimate - target): empirical variance
// of the influence values (non-negative by construction).
double variance(const ConditioningDesign& design, const CpcEstimate& est,
                const empirical::KernelConfig& kernel = {});

// Two-sided test of zero conditional correlation at the (clamped) pair.
TestResult test_zero(std::span<const double> y, std::span<const double> x,
                     const ConditioningDesign& design, QuantilePair pair,
                     const empirical::KernelConfig& kernel = {},
                     const quantreg::FitOptions& fit = {});

// Two-sided test of equal conditional correlation of y with x1 and x2
// given the same design. The response-side fit is shared.
EqualTestResult test_equal(std::span<const double> y,
                           std::span<const double> x1,
                           std::span<const double> x2,
                           const ConditioningDesign& design, QuantilePair pair,
                           const empirical::KernelConfig& kernel = {},
                           const quantreg::FitOptions& fit = {});

} // namespace cps::cpc
