#include "cps/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cps/errors.hpp"

namespace cps::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw insufficient_data_error("mean of an empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double pop_variance(std::span<const double> xs) {
    if (xs.empty())
        throw insufficient_data_error("variance of an empty sample");
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(n - 1));
}

double median(std::span<const double> xs) {
    if (xs.empty()) throw insufficient_data_error("median of an empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    std::size_t n = v.size();
    std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

double mad(std::span<const double> xs) {
    double med = median(xs);
    std::vector<double> dev(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = std::abs(xs[i] - med);
    return median(dev);
}

double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double norm_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw domain_error("normal quantile level must lie inside (0, 1)");
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return boost::math::quantile(dist, p);
}

double two_sided_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double student_t_quantile(double df, double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw domain_error("t quantile level must lie inside (0, 1)");
    boost::math::students_t_distribution<double> dist(df);
    return boost::math::quantile(dist, p);
}

double pearson_corr(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw domain_error("pearson_corr needs matching lengths");
    std::size_t n = x.size();
    if (n < 2) throw insufficient_data_error("pearson_corr needs n >= 2");
    double mx = mean(x);
    double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw domain_error("kendall_tau needs matching lengths");
    std::size_t n = x.size();
    if (n < 2) throw insufficient_data_error("kendall_tau needs n >= 2");
    long long net = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = x[j] - x[i];
            double dy = y[j] - y[i];
            double prod = dx * dy;
            if (prod > 0.0)
                ++net;
            else if (prod < 0.0)
                --net;
        }
    }
    double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return static_cast<double>(net) / pairs;
}

} // namespace cps::stats
