#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cps::empirical {

enum class Kernel { gaussian };

// Kernel smoother settings shared by the density and regression helpers.
// A non-positive bandwidth requests the plug-in rule (see silverman_bandwidth).
struct KernelConfig {
    Kernel kernel = Kernel::gaussian;
    double bandwidth = 0.0;

    static KernelConfig automatic() { return {}; }
    static KernelConfig fixed(double h);

    bool is_auto() const { return bandwidth <= 0.0; }
};

// Immutable sorted copy of a univariate sample.
class SortedSample {
public:
    explicit SortedSample(std::span<const double> data);

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

// Fraction of sample values <= x.
double ecdf(const SortedSample& sample, double x);

// Left-continuous generalized inverse: the ceil(n*tau)-th order statistic.
// tau must lie strictly inside (0, 1).
double equantile(const SortedSample& sample, double tau);

// k-th order statistic (1-based) without materializing a SortedSample.
double order_statistic(std::span<const double> data, std::size_t k);

// equantile evaluated through order_statistic; same convention.
double quantile_of(std::span<const double> data, double tau);

// Quantile score: psi_w(u) = w - 1{u <= 0}.
inline double psi(double w, double u) { return w - (u <= 0.0 ? 1.0 : 0.0); }

// 1.06 * min(sd, IQR/1.34) * n^(-1/5); falls back to the non-zero spread
// measure when one of them collapses, and to 1.0 when both do.
double silverman_bandwidth(std::span<const double> xs);

// Raw gaussian kernel weights K((x0 - x_i)/h). Throws degenerate_window_error
// if every weight underflows to zero.
std::vector<double> nw_weights(std::span<const double> x, double x0,
                               const KernelConfig& cfg = {});

// Nadaraya-Watson regression of y on x evaluated at x0.
double nw_regress(std::span<const double> x, std::span<const double> y,
                  double x0, const KernelConfig& cfg = {});

// Gaussian kernel density estimate of the residual distribution at zero.
double kde_at_zero(std::span<const double> residuals,
                   const KernelConfig& cfg = {});

} // namespace cps::empirical
