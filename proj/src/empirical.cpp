#include "cps/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cps/errors.hpp"
#include "cps/stats.hpp"

namespace cps::empirical {

KernelConfig KernelConfig::fixed(double h) {
    if (!(h > 0.0))
        throw domain_error("kernel bandwidth must be positive");
    KernelConfig cfg;
    cfg.bandwidth = h;
    return cfg;
}

SortedSample::SortedSample(std::span<const double> data)
    : values_(data.begin(), data.end()) {
    if (values_.empty())
        throw insufficient_data_error("sorted sample needs at least one value");
    std::sort(values_.begin(), values_.end());
}

double ecdf(const SortedSample& sample, double x) {
    const auto& v = sample.values();
    auto it = std::upper_bound(v.begin(), v.end(), x);
    return static_cast<double>(it - v.begin()) / static_cast<double>(v.size());
}

namespace {

std::size_t quantile_index(std::size_t n, double tau) {
    if (!(tau > 0.0) || !(tau < 1.0))
        throw domain_error("quantile level must lie strictly inside (0, 1)");
    double k = std::ceil(static_cast<double>(n) * tau);
    if (k < 1.0) k = 1.0;
    auto idx = static_cast<std::size_t>(k);
    if (idx > n) idx = n;
    return idx;
}

} // namespace

double equantile(const SortedSample& sample, double tau) {
    std::size_t k = quantile_index(sample.size(), tau);
    return sample.values()[k - 1];
}

double order_statistic(std::span<const double> data, std::size_t k) {
    if (data.empty())
        throw insufficient_data_error("order statistic of an empty sample");
    if (k < 1 || k > data.size())
        throw domain_error("order statistic index out of range");
    std::vector<double> scratch(data.begin(), data.end());
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    return scratch[k - 1];
}

double quantile_of(std::span<const double> data, double tau) {
    if (data.empty())
        throw insufficient_data_error("quantile of an empty sample");
    return order_statistic(data, quantile_index(data.size(), tau));
}

double silverman_bandwidth(std::span<const double> xs) {
    std::size_t n = xs.size();
    if (n < 2) return 1.0;
    double sd = stats::sample_sd(xs);
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    SortedSample s{sorted};
    double iqr = equantile(s, 0.75) - equantile(s, 0.25);
    double spread_a = sd;
    double spread_b = iqr / 1.34;
    double scale;
    if (spread_a > 0.0 && spread_b > 0.0)
        scale = std::min(spread_a, spread_b);
    else
        scale = std::max(spread_a, spread_b);
    if (!(scale > 0.0)) return 1.0;
    return 1.06 * scale * std::pow(static_cast<double>(n), -0.2);
}

namespace {

double resolve_bandwidth(std::span<const double> x, const KernelConfig& cfg) {
    return cfg.is_auto() ? silverman_bandwidth(x) : cfg.bandwidth;
}

} // namespace

std::vector<double> nw_weights(std::span<const double> x, double x0,
                               const KernelConfig& cfg) {
    if (x.empty())
        throw insufficient_data_error("kernel weights need at least one point");
    double h = resolve_bandwidth(x, cfg);
    std::vector<double> w(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double t = (x0 - x[i]) / h;
        w[i] = std::exp(-0.5 * t * t);
        total += w[i];
    }
    if (!(total > 0.0))
        throw degenerate_window_error("all kernel weights vanished");
    return w;
}

double nw_regress(std::span<const double> x, std::span<const double> y,
                  double x0, const KernelConfig& cfg) {
    if (x.size() != y.size())
        throw domain_error("nw_regress needs matching lengths");
    if (x.empty())
        throw insufficient_data_error("nw_regress on an empty sample");
    std::vector<double> w = nw_weights(x, x0, cfg);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += w[i] * y[i];
        den += w[i];
    }
    return num / den;
}

double kde_at_zero(std::span<const double> residuals, const KernelConfig& cfg) {
    if (residuals.empty())
        throw insufficient_data_error("kde_at_zero on an empty sample");
    double h = resolve_bandwidth(residuals, cfg);
    double sum = 0.0;
    for (double r : residuals) sum += stats::norm_pdf(r / h);
    return sum / (static_cast<double>(residuals.size()) * h);
}

} // namespace cps::empirical
