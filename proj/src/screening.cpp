#include "cps/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "cps/errors.hpp"
#include "cps/parallel.hpp"
#include "cps/stats.hpp"

namespace cps {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("COPULA_SCREEN_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

} // namespace cps

namespace cps::screening {

namespace {

std::vector<std::size_t> ranked_indices(const std::vector<double>& utilities) {
    std::vector<std::size_t> idx(utilities.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (utilities[a] != utilities[b]) return utilities[a] > utilities[b];
        return a < b;
    });
    return idx;
}

std::size_t resolve_dn(const ScreeningConfig& cfg, std::size_t n, std::size_t p) {
    std::size_t d = cfg.d_n > 0 ? cfg.d_n : default_dn(n);
    return std::min(d, p);
}

// Variance callback returns the estimator variance for covariate j, or a
// negative value when it is degenerate (the column is then never selected).
template <typename VarianceFn>
void apply_threshold(ScreeningResult& res, const ScreeningConfig& cfg,
                     std::size_t n, VarianceFn&& variance_of) {
    const std::size_t p = res.utilities.size();
    switch (cfg.mode) {
    case ThresholdMode::top_dn: {
        std::size_t d = resolve_dn(cfg, n, p);
        res.selected.assign(res.ranking.begin(),
                            res.ranking.begin() + static_cast<std::ptrdiff_t>(d));
        res.threshold_used = d > 0 ? res.utilities[res.ranking[d - 1]] : 0.0;
        break;
    }
    case ThresholdMode::absolute: {
        for (std::size_t j : res.ranking)
            if (res.utilities[j] >= cfg.nu_n) res.selected.push_back(j);
        res.threshold_used = cfg.nu_n;
        break;
    }
    case ThresholdMode::fdr: {
        double delta = fdr_threshold(p, cfg.dbar_n);
        double root_n = std::sqrt(static_cast<double>(n));
        std::vector<double> var(p, -1.0);
        parallel_for(p, resolve_threads(cfg.threads),
                     [&](std::size_t j) { var[j] = variance_of(j); });
        for (std::size_t j : res.ranking) {
            if (var[j] <= 0.0) {
                res.notes.push_back("column " + std::to_string(j + 1) +
                                    ": degenerate variance, skipped by the fdr rule");
                continue;
            }
            double z = root_n * res.utilities[j] / std::sqrt(var[j]);
            if (z >= delta) res.selected.push_back(j);
        }
        res.threshold_used = delta;
        break;
    }
    }
}

void validate_inputs(std::span<const double> y, const Eigen::MatrixXd& X) {
    if (y.size() < 2) throw insufficient_data_error("need at least two observations");
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw domain_error("response and covariate matrix lengths differ");
    if (X.cols() < 1) throw domain_error("covariate matrix has no columns");
}

std::span<const double> column_span(const Eigen::MatrixXd& X, std::size_t j) {
    return {X.col(static_cast<Eigen::Index>(j)).data(),
            static_cast<std::size_t>(X.rows())};
}

} // namespace

std::size_t default_dn(std::size_t n) {
    if (n < 2) return 1;
    double v = std::floor(static_cast<double>(n) / std::log(static_cast<double>(n)));
    return v < 1.0 ? 1 : static_cast<std::size_t>(v);
}

std::size_t default_dstar(std::size_t n) {
    if (n < 2) return 1;
    double v = std::floor(
        2.0 * std::sqrt(static_cast<double>(n) / std::log(static_cast<double>(n))));
    return v < 1.0 ? 1 : static_cast<std::size_t>(v);
}

double fdr_threshold(std::size_t p, double dbar) {
    if (dbar < 1.0)
        throw domain_error("fdr mode needs a tolerated false-selection count of at least 1");
    if (dbar >= 2.0 * static_cast<double>(p))
        throw domain_error("tolerated false-selection count too large for this many columns");
    return stats::norm_quantile(1.0 - dbar / (2.0 * static_cast<double>(p)));
}

ScreeningResult cc_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                       const ScreeningConfig& cfg) {
    validate_inputs(y, X);
    const std::size_t n = y.size();
    const std::size_t p = static_cast<std::size_t>(X.cols());

    ScreeningResult res;
    res.utilities.assign(p, 0.0);
    parallel_for(p, resolve_threads(cfg.threads), [&](std::size_t j) {
        res.utilities[j] =
            std::abs(cc::estimate(y, column_span(X, j), cfg.pair).value);
    });
    res.ranking = ranked_indices(res.utilities);
    apply_threshold(res, cfg, n, [&](std::size_t j) {
        try {
            return cc::variance(y, column_span(X, j), cfg.pair, cfg.kernel);
        } catch (const degenerate_variance_error&) {
            return -1.0;
        }
    });
    return res;
}

namespace {

ScreeningResult plain_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                          const ScreeningConfig& cfg,
                          double (*corr)(std::span<const double>,
                                         std::span<const double>)) {
    validate_inputs(y, X);
    if (cfg.mode == ThresholdMode::fdr)
        throw domain_error("fdr mode needs a variance model; use the cc or cpc screeners");
    const std::size_t p = static_cast<std::size_t>(X.cols());
    ScreeningResult res;
    res.utilities.assign(p, 0.0);
    parallel_for(p, resolve_threads(cfg.threads), [&](std::size_t j) {
        res.utilities[j] = std::abs(corr(y, column_span(X, j)));
    });
    res.ranking = ranked_indices(res.utilities);
    apply_threshold(res, cfg, y.size(), [](std::size_t) { return -1.0; });
    return res;
}

} // namespace

ScreeningResult pearson_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                            const ScreeningConfig& cfg) {
    return plain_sis(y, X, cfg, &stats::pearson_corr);
}

ScreeningResult kendall_sis(std::span<const double> y, const Eigen::MatrixXd& X,
                            const ScreeningConfig& cfg) {
    return plain_sis(y, X, cfg, &stats::kendall_tau);
}

ScreeningResult cpc_sis_case2(std::span<const double> y, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& W,
                              const ScreeningConfig& cfg) {
    validate_inputs(y, X);
    if (W.rows() != X.rows())
        throw domain_error("conditioning matrix rows differ from the sample size");
    const std::size_t n = y.size();
    const std::size_t p = static_cast<std::size_t>(X.cols());

    cpc::ConditioningDesign design = cpc::ConditioningDesign::external(W);
    Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(n));
    quantreg::QuantRegFit y_fit = quantreg::fit(design.Z, ym, cfg.pair.tau, cfg.fit);

    ScreeningResult res;
    res.utilities.assign(p, 0.0);
    std::vector<cpc::CpcEstimate> ests(p);
    parallel_for(p, resolve_threads(cfg.threads), [&](std::size_t j) {
        ests[j] = cpc::estimate_with_y_fit(y_fit, column_span(X, j), design,
                                           cfg.pair, cfg.fit);
        res.utilities[j] = std::abs(ests[j].value);
    });
    if (y_fit.ridge_used)
        res.notes.push_back("response fit used a ridge fallback");
    res.ranking = ranked_indices(res.utilities);
    apply_threshold(res, cfg, n, [&](std::size_t j) {
        try {
            return cpc::variance(design, ests[j], cfg.kernel);
        } catch (const degenerate_variance_error&) {
            return -1.0;
        }
    });
    return res;
}

namespace {

// Seed sets: for each covariate, the ell strongest companions by the
// absolute quantile-threshold correlation, computed in row blocks.
std::vector<std::vector<std::size_t>> seed_sets(const Eigen::MatrixXd& X,
                                                const cc::QuantilePair& pair,
                                                std::size_t ell,
                                                unsigned threads) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    std::vector<std::vector<std::size_t>> seeds(static_cast<std::size_t>(p));
    if (ell == 0) return seeds;

    Eigen::MatrixXd A(n, p);  // tau-side centered indicators, first argument
    Eigen::MatrixXd B(n, p);  // iota-side centered indicators, second argument
    parallel_for(static_cast<std::size_t>(p), threads, [&](std::size_t j) {
        Eigen::Index jc = static_cast<Eigen::Index>(j);
        std::span<const double> col(X.col(jc).data(), static_cast<std::size_t>(n));
        double qt = empirical::quantile_of(col, pair.tau);
        double qi = empirical::quantile_of(col, pair.iota);
        for (Eigen::Index i = 0; i < n; ++i) {
            A(i, jc) = pair.tau - (X(i, jc) <= qt ? 1.0 : 0.0);
            B(i, jc) = pair.iota - (X(i, jc) <= qi ? 1.0 : 0.0);
        }
    });

    const double scale =
        static_cast<double>(n) *
        std::sqrt(pair.tau * (1.0 - pair.tau) * pair.iota * (1.0 - pair.iota));
    const Eigen::Index block = 256;
    for (Eigen::Index j0 = 0; j0 < p; j0 += block) {
        Eigen::Index nb = std::min(block, p - j0);
        Eigen::MatrixXd C = A.middleCols(j0, nb).transpose() * B / scale;
        parallel_for(static_cast<std::size_t>(nb), threads, [&](std::size_t r) {
            Eigen::Index j = j0 + static_cast<Eigen::Index>(r);
            std::vector<std::size_t> order(static_cast<std::size_t>(p));
            std::iota(order.begin(), order.end(), std::size_t{0});
            auto better = [&](std::size_t a, std::size_t b) {
                double ua = a == static_cast<std::size_t>(j)
                                ? -1.0
                                : std::abs(C(static_cast<Eigen::Index>(r),
                                             static_cast<Eigen::Index>(a)));
                double ub = b == static_cast<std::size_t>(j)
                                ? -1.0
                                : std::abs(C(static_cast<Eigen::Index>(r),
                                             static_cast<Eigen::Index>(b)));
                if (ua != ub) return ua > ub;
                return a < b;
            };
            std::size_t take = std::min(ell, static_cast<std::size_t>(p) - 1);
            std::partial_sort(order.begin(),
                              order.begin() + static_cast<std::ptrdiff_t>(take),
                              order.end(), better);
            seeds[static_cast<std::size_t>(j)]
                .assign(order.begin(),
                        order.begin() + static_cast<std::ptrdiff_t>(take));
        });
    }
    return seeds;
}

std::vector<std::size_t> union_without(const std::vector<std::size_t>& active,
                                       const std::vector<std::size_t>& seed,
                                       std::size_t j) {
    std::vector<std::size_t> out;
    out.reserve(active.size() + seed.size());
    for (std::size_t k : active)
        if (k != j) out.push_back(k);
    for (std::size_t k : seed)
        if (k != j) out.push_back(k);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct CandidateEval {
    double utility = 0.0;
    bool ridge = false;
    bool valid = false;
};

ScreeningResult iterative_cpc(std::span<const double> y, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd* W,
                              const ScreeningConfig& cfg) {
    validate_inputs(y, X);
    const std::size_t n = y.size();
    if (n < 30)
        throw insufficient_data_error(
            "iterative conditional screening needs at least 30 observations");
    if (W != nullptr && W->rows() != X.rows())
        throw domain_error("conditioning matrix rows differ from the sample size");
    const std::size_t p = static_cast<std::size_t>(X.cols());
    const unsigned threads = resolve_threads(cfg.threads);

    const std::size_t d_n = resolve_dn(cfg, n, p);
    const std::size_t d_star = std::min(default_dstar(n), d_n);
    const std::size_t ell = std::min(cfg.ell, p > 0 ? p - 1 : 0);

    auto seeds = seed_sets(X, cfg.pair, ell, threads);

    auto build_design = [&](const std::vector<std::size_t>& cols) {
        return W == nullptr
                   ? cpc::ConditioningDesign::covariate_subset(X, cols)
                   : cpc::ConditioningDesign::mixed(*W, X, cols);
    };

    auto evaluate = [&](std::size_t j, const std::vector<std::size_t>& cols) {
        CandidateEval ev;
        cpc::ConditioningDesign design = build_design(cols);
        cpc::CpcEstimate est =
            cpc::estimate(y, column_span(X, j), design, cfg.pair, cfg.fit);
        ev.utility = std::abs(est.value);
        ev.ridge = est.y_fit.ridge_used || est.x_fit.ridge_used;
        ev.valid = true;
        return ev;
    };

    ScreeningResult res;
    res.utilities.assign(p, 0.0);
    std::vector<std::vector<std::size_t>> cond_sets(p);
    std::vector<bool> in_active(p, false);
    std::vector<std::size_t> active;
    active.reserve(d_n);

    // Growth phase: re-evaluate every remaining candidate each iteration.
    for (std::size_t k = 1; k <= d_star && active.size() < d_n; ++k) {
        std::vector<CandidateEval> evals(p);
        parallel_for(p, threads, [&](std::size_t j) {
            if (in_active[j]) return;
            evals[j] = evaluate(j, union_without(active, seeds[j], j));
        });
        std::size_t best = p;
        for (std::size_t j = 0; j < p; ++j) {
            if (!evals[j].valid) continue;
            if (best == p || evals[j].utility > evals[best].utility) best = j;
        }
        if (best == p) break;
        std::vector<std::size_t> cols = union_without(active, seeds[best], best);
        res.per_step_log.push_back({k, best, cols, evals[best].ridge});
        res.utilities[best] = evals[best].utility;
        cond_sets[best] = std::move(cols);
        in_active[best] = true;
        active.push_back(best);
    }

    // Frozen phase: conditioning sets stop growing, so each remaining
    // utility is computed once and the rest of the ordering follows.
    std::vector<std::size_t> frozen_active = active;
    std::vector<CandidateEval> frozen(p);
    parallel_for(p, threads, [&](std::size_t j) {
        if (in_active[j]) return;
        cond_sets[j] = union_without(frozen_active, seeds[j], j);
        frozen[j] = evaluate(j, cond_sets[j]);
    });
    std::vector<std::size_t> remaining;
    for (std::size_t j = 0; j < p; ++j) {
        if (in_active[j]) continue;
        res.utilities[j] = frozen[j].utility;
        remaining.push_back(j);
    }
    std::sort(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
        if (res.utilities[a] != res.utilities[b])
            return res.utilities[a] > res.utilities[b];
        return a < b;
    });
    for (std::size_t j : remaining) {
        if (active.size() >= d_n) break;
        res.per_step_log.push_back(
            {active.size() + 1, j, cond_sets[j], frozen[j].ridge});
        in_active[j] = true;
        active.push_back(j);
    }

    res.ranking = active;
    for (std::size_t j : remaining)
        if (std::find(active.begin(), active.end(), j) == active.end())
            res.ranking.push_back(j);

    switch (cfg.mode) {
    case ThresholdMode::top_dn:
        res.selected = active;
        res.threshold_used =
            active.empty() ? 0.0 : res.utilities[active.back()];
        break;
    case ThresholdMode::absolute:
        for (std::size_t j : res.ranking)
            if (res.utilities[j] >= cfg.nu_n) res.selected.push_back(j);
        res.threshold_used = cfg.nu_n;
        break;
    case ThresholdMode::fdr: {
        double delta = fdr_threshold(p, cfg.dbar_n);
        double root_n = std::sqrt(static_cast<double>(n));
        std::vector<double> var(p, -1.0);
        parallel_for(p, threads, [&](std::size_t j) {
            try {
                cpc::ConditioningDesign design = build_design(cond_sets[j]);
                cpc::CpcEstimate est = cpc::estimate(y, column_span(X, j), design,
                                                     cfg.pair, cfg.fit);
                var[j] = cpc::variance(design, est, cfg.kernel);
            } catch (const degenerate_variance_error&) {
                var[j] = -1.0;
            }
        });
        for (std::size_t j : res.ranking) {
            if (var[j] <= 0.0) {
                res.notes.push_back("column " + std::to_string(j + 1) +
                                    ": degenerate variance, skipped by the fdr rule");
                continue;
            }
            if (root_n * res.utilities[j] / std::sqrt(var[j]) >= delta)
                res.selected.push_back(j);
        }
        res.threshold_used = delta;
        break;
    }
    }
    return res;
}

} // namespace

ScreeningResult cpc_sis_case1(std::span<const double> y, const Eigen::MatrixXd& X,
                              const ScreeningConfig& cfg) {
    return iterative_cpc(y, X, nullptr, cfg);
}

ScreeningResult cpc_sis_case3(std::span<const double> y, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& W,
                              const ScreeningConfig& cfg) {
    return iterative_cpc(y, X, &W, cfg);
}

} // namespace cps::screening
