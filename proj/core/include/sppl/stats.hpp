#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sppl::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased; 0 for n < 2

// Monte Carlo standard error of the mean via non-overlapping batch means,
// which stays honest under autocorrelation.  Falls back to iid SE when there
// are fewer than 2 full batches.
double batch_means_se(std::span<const double> xs, std::size_t n_batches = 50);

// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Large-sample critical value sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(n*m)).
double ks_critical(double alpha, std::size_t n, std::size_t m);

// Least-squares slope of ys against xs.
double linreg_slope(std::span<const double> xs, std::span<const double> ys);

// Quantile with linear interpolation between order statistics; q in [0, 1].
double quantile(std::vector<double> xs, double q);

double logsumexp(std::span<const double> xs);

// Standard normal density and CDF.
double normal_pdf(double x);
double normal_cdf(double x);

// About `count` distinct integers log-spaced over [lo, hi], ascending,
// always including both endpoints.
std::vector<std::size_t> log_spaced(std::size_t lo, std::size_t hi,
                                    std::size_t count);

// Sums `terms` after sorting ascending.  Makes reductions invariant to the
// order the terms were produced in — bit-for-bit, not just approximately —
// which the exact-posterior code relies on for label-symmetry checks.
double sorted_sum(std::vector<double> terms);

}  // namespace sppl::stats
