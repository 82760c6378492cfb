#pragma once

#include <cstddef>
#include <span>

namespace cps::stats {

double mean(std::span<const double> xs);

// Population variance (divides by n).
double pop_variance(std::span<const double> xs);

// Sample standard deviation (divides by n-1); zero for n < 2.
double sample_sd(std::span<const double> xs);

// Median with the usual convention: average of the two middle order
// statistics for even n.
double median(std::span<const double> xs);

// Median absolute deviation about the median, unscaled.
double mad(std::span<const double> xs);

double norm_pdf(double x);
double norm_cdf(double x);

// Inverse standard normal CDF; p must lie strictly inside (0, 1).
double norm_quantile(double p);

// Two-sided tail probability 2 * (1 - Phi(|z|)), computed via erfc.
double two_sided_p(double z);

// Quantile of Student's t distribution.
double student_t_quantile(double df, double p);

// Pearson correlation; zero if either argument has zero variance.
double pearson_corr(std::span<const double> x, std::span<const double> y);

// Kendall's tau-a: (concordant - discordant) / (n choose 2).
double kendall_tau(std::span<const double> x, std::span<const double> y);

} // namespace cps::stats
