#include "cps/cc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "cps/errors.hpp"
#include "cps/stats.hpp"

namespace cps::cc {

namespace {

void validate_pair(const QuantilePair& p) {
    if (!(p.tau > 0.0) || !(p.tau < 1.0) || !(p.iota > 0.0) || !(p.iota < 1.0))
        throw domain_error("quantile pair must lie strictly inside (0, 1)^2");
}

QuantilePair clamp_pair(QuantilePair p) {
    validate_pair(p);
    p.tau = std::clamp(p.tau, 0.05, 0.95);
    p.iota = std::clamp(p.iota, 0.05, 0.95);
    return p;
}

double norm_const(const QuantilePair& p) {
    return std::sqrt(p.tau * (1.0 - p.tau) * p.iota * (1.0 - p.iota));
}

struct PairContext {
    double qy = 0.0;
    double qx = 0.0;
    std::vector<std::uint8_t> iy;
    std::vector<std::uint8_t> ix;
    double s = 1.0;
};

PairContext build_context(std::span<const double> y, std::span<const double> x,
                          const QuantilePair& pair) {
    if (y.size() != x.size())
        throw domain_error("paired samples must have matching lengths");
    if (y.size() < 2)
        throw insufficient_data_error("correlation needs at least two pairs");
    PairContext ctx;
    ctx.qy = empirical::quantile_of(y, pair.tau);
    ctx.qx = empirical::quantile_of(x, pair.iota);
    ctx.s = norm_const(pair);
    std::size_t n = y.size();
    ctx.iy.resize(n);
    ctx.ix.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ctx.iy[i] = y[i] <= ctx.qy ? 1 : 0;
        ctx.ix[i] = x[i] <= ctx.qx ? 1 : 0;
    }
    return ctx;
}

double value_from_context(const PairContext& ctx, const QuantilePair& pair) {
    std::size_t n = ctx.iy.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double py = pair.tau - static_cast<double>(ctx.iy[i]);
        double px = pair.iota - static_cast<double>(ctx.ix[i]);
        sum += py * px;
    }
    return sum / (static_cast<double>(n) * ctx.s);
}

// Influence values for a prepared context: the conditional threshold
// probabilities come from kernel regression of one indicator on the other
// variable at its empirical quantile.
std::vector<double> influence_from_context(std::span<const double> y,
                                           std::span<const double> x,
                                           const PairContext& ctx,
                                           const empirical::KernelConfig& kernel) {
    std::size_t n = y.size();
    std::vector<double> ix_d(n), iy_d(n);
    for (std::size_t i = 0; i < n; ++i) {
        ix_d[i] = static_cast<double>(ctx.ix[i]);
        iy_d[i] = static_cast<double>(ctx.iy[i]);
    }
    double sigma_xy = empirical::nw_regress(y, ix_d, ctx.qy, kernel);
    double sigma_yx = empirical::nw_regress(x, iy_d, ctx.qx, kernel);
    sigma_xy = std::clamp(sigma_xy, 0.0, 1.0);
    sigma_yx = std::clamp(sigma_yx, 0.0, 1.0);

    std::vector<double> xi(n);
    for (std::size_t i = 0; i < n; ++i) {
        double joint = ctx.iy[i] && ctx.ix[i] ? 1.0 : 0.0;
        xi[i] = (joint - sigma_xy * iy_d[i] - sigma_yx * ix_d[i]) / ctx.s;
    }
    return xi;
}

} // namespace

CorrelationEstimate estimate(std::span<const double> y,
                             std::span<const double> x, QuantilePair pair) {
    validate_pair(pair);
    PairContext ctx = build_context(y, x, pair);
    CorrelationEstimate est;
    est.value = value_from_context(ctx, pair);
    est.pair = pair;
    est.n = y.size();
    return est;
}

std::vector<double> influence_values(std::span<const double> y,
                                     std::span<const double> x,
                                     QuantilePair pair,
                                     const empirical::KernelConfig& kernel) {
    QuantilePair cp = clamp_pair(pair);
    PairContext ctx = build_context(y, x, cp);
    return influence_from_context(y, x, ctx, kernel);
}

double variance(std::span<const double> y, std::span<const double> x,
                QuantilePair pair, const empirical::KernelConfig& kernel) {
    std::vector<double> xi = influence_values(y, x, pair, kernel);
    double omega = stats::pop_variance(xi);
    if (omega <= 1e-12)
        throw degenerate_variance_error("influence variance collapsed");
    return omega;
}

double offdiag_cov(std::span<const double> y, std::span<const double> x,
                   QuantilePair a, QuantilePair b,
                   const empirical::KernelConfig& kernel) {
    std::vector<double> xa = influence_values(y, x, a, kernel);
    std::vector<double> xb = influence_values(y, x, b, kernel);
    double ma = stats::mean(xa);
    double mb = stats::mean(xb);
    double s = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i)
        s += (xa[i] - ma) * (xb[i] - mb);
    return s / static_cast<double>(xa.size());
}

TestResult test_zero(std::span<const double> y, std::span<const double> x,
                     QuantilePair pair, const empirical::KernelConfig& kernel) {
    QuantilePair cp = clamp_pair(pair);
    TestResult res;
    res.estimate = estimate(y, x, cp);
    res.estimate.variance = variance(y, x, cp, kernel);
    double n = static_cast<double>(res.estimate.n);
    res.z = std::sqrt(n) * res.estimate.value / std::sqrt(res.estimate.variance);
    res.p_value = stats::two_sided_p(res.z);
    return res;
}

EqualTestResult test_equal(std::span<const double> y,
                           std::span<const double> x1,
                           std::span<const double> x2, QuantilePair pair,
                           const empirical::KernelConfig& kernel) {
    QuantilePair cp = clamp_pair(pair);
    PairContext c1 = build_context(y, x1, cp);
    PairContext c2 = build_context(y, x2, cp);

    EqualTestResult res;
    res.first.value = value_from_context(c1, cp);
    res.first.pair = cp;
    res.first.n = y.size();
    res.second.value = value_from_context(c2, cp);
    res.second.pair = cp;
    res.second.n = y.size();

    std::vector<double> xi1 = influence_from_context(y, x1, c1, kernel);
    std::vector<double> xi2 = influence_from_context(y, x2, c2, kernel);
    std::vector<double> diff(xi1.size());
    for (std::size_t i = 0; i < xi1.size(); ++i) diff[i] = xi1[i] - xi2[i];

    res.delta = res.first.value - res.second.value;
    res.xi = stats::pop_variance(diff);
    if (res.xi <= 1e-12)
        throw degenerate_variance_error(
            "paired influence variance collapsed (identical covariates?)");
    double n = static_cast<double>(y.size());
    res.z = std::sqrt(n) * res.delta / std::sqrt(res.xi);
    res.p_value = stats::two_sided_p(res.z);
    return res;
}

} // namespace cps::cc
