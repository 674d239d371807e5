#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace weber::stats {

double mean(std::span<const double> x);
// Sample variance (n - 1 denominator).
double variance(std::span<const double> x);
double stddev(std::span<const double> x);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);
double normal_quantile(double p);
double logistic(double z);
// log(logistic(z)) without overflow.
double log_logistic(double z);

// Upper tail of chi-square with one degree of freedom.
double chi2_sf_df1(double x);
// Two-sided p for a Pearson/Spearman coefficient via the t approximation.
double correlation_p_two_sided(double r, std::size_t n);
// Two-sided exact binomial test of k successes in n against p0.
double binomial_test_two_sided(std::size_t k, std::size_t n, double p0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

// Type-7 (linear interpolation) quantile of an already sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
  double tss = 0.0;
};

// Ordinary least squares y = a + b x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Exact null distribution of Spearman's rho for n untied ranks, computed by
// dynamic programming over assignments. Returns P(rho <= r) and P(rho >= r).
// Only available for n <= 12.
std::pair<double, double> spearman_exact_tails(double r, std::size_t n);

// Binary entropy in nats.
double binary_entropy(double p);

}  // namespace weber::stats
