#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cps/cc.hpp"
#include "cps/cpc.hpp"
#include "cps/empirical.hpp"
#include "cps/quantreg.hpp"

namespace cps::screening {

enum class ThresholdMode { top_dn, absolute, fdr };

struct ScreeningConfig {
    cc::QuantilePair pair{0.5, 0.5};
    std::size_t d_n = 0;    // 0 resolves to floor(n / log n)
    ThresholdMode mode = ThresholdMode::top_dn;
    double nu_n = 0.0;      // absolute-mode utility cutoff
    double dbar_n = 10.0;   // fdr mode: tolerated count of false selections
    std::size_t ell = 3;    // size of the per-covariate conditioning seed set
    empirical::KernelConfig kernel{};
    quantreg::FitOptions fit{};
    unsigned threads = 1;
};

struct StepRecord {
    std::size_t iteration = 0;
    std::size_t chosen = 0;
    std::vector<std::size_t> conditional_set;
    bool ridge_used = false;
};

struct ScreeningResult {
    std::vector<double> utilities;       // per covariate, absolute scale
    std::vector<std::size_t> ranking;    // all covariate indices, best first
    std::vector<std::size_t> selected;   // per the threshold mode
    double threshold_used = 0.0;
    std::vector<StepRecord> per_step_log;
    std::vector<std::string> notes;
};

std::size_t default_dn(std::size_t n);     // floor(n / log n)
std::size_t default_dstar(std::size_t n);  // floor(2 * sqrt(n / log n))

// z-score cutoff Phi^{-1}(1 - dbar / (2p)) controlling the expected count
// of false selections.
double fdr_threshold(std::size_t p, double dbar);

// Marginal screening by the absolute quantile-threshold correlation of the
// response with each covariate.
ScreeningResult cc_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                       const ScreeningConfig& cfg);

// Classical marginal baselines.
ScreeningResult pearson_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                            const ScreeningConfig& cfg);
ScreeningResult kendall_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                            const ScreeningConfig& cfg);

// Conditional screening with data-driven conditioning sets: each covariate
// carries a seed set of its ell strongest companions, the active set grows
// greedily, and the conditioning sets freeze after an initial burn-in of
// default_dstar(n) steps.
ScreeningResult cpc_sis_case1(std::span<const double> y,
                              const Eigen::MatrixXd& X,
                              const ScreeningConfig& cfg);

// Conditional screening given fixed external conditioning variables W.
ScreeningResult cpc_sis_case2(std::span<const double> y,
                              const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& W,
                              const ScreeningConfig& cfg);

// External conditioning variables plus data-driven covariate sets.
ScreeningResult cpc_sis_case3(std::span<const double> y,
                              const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& W,
                              const ScreeningConfig& cfg);

} // namespace cps::screening
