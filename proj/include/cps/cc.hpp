#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cps/empirical.hpp"

namespace cps::cc {

// Pair of quantile levels (tau for the response side, iota for the
// covariate side). Estimation accepts any pair inside (0,1)^2; inference
// routines clamp both levels to [0.05, 0.95] first.
struct QuantilePair {
    double tau = 0.5;
    double iota = 0.5;
};

struct CorrelationEstimate {
    double value = 0.0;
    QuantilePair pair;
    std::size_t n = 0;
    double variance = 0.0;  // filled by the inference routines
};

struct TestResult {
    CorrelationEstimate estimate;
    double z = 0.0;
    double p_value = 1.0;
};

struct EqualTestResult {
    CorrelationEstimate first;
    CorrelationEstimate second;
    double delta = 0.0;  // first.value - second.value
    double xi = 0.0;     // variance of the paired influence difference
    double z = 0.0;
    double p_value = 1.0;
};

// Quantile-threshold correlation of (y, x) at the given pair, computed from
// the normalized product of quantile scores at the empirical quantiles.
CorrelationEstimate estimate(std::span<const double> y,
                             std::span<const double> x, QuantilePair pair);

// Asymptotic variance of sqrt(n) * (estimate - target), from the empirical
// variance of the plug-in influence values.
double variance(std::span<const double> y, std::span<const double> x,
                QuantilePair pair,
                const empirical::KernelConfig& kernel = {});

// Asymptotic covariance between the estimates at two level pairs.
double offdiag_cov(std::span<const double> y, std::span<const double> x,
                   QuantilePair a, QuantilePair b,
                   const empirical::KernelConfig& kernel = {});

// Per-observation influence values (used by the test routines and by the
// validation suite).
std::vector<double> influence_values(std::span<const double> y,
                                     std::span<const double> x,
                                     QuantilePair pair,
                                     const empirical::KernelConfig& kernel = {});

// Two-sided test of zero correlation at the (clamped) pair.
TestResult test_zero(std::span<const double> y, std::span<const double> x,
                     QuantilePair pair,
                     const empirical::KernelConfig& kernel = {});

// Two-sided test of equal correlation of y with x1 and with x2.
EqualTestResult test_equal(std::span<const double> y,
                           std::span<const double> x1,
                           std::span<const double> x2, QuantilePair pair,
                           const empirical::KernelConfig& kernel = {});

} // namespace cps::cc
