#include "weber/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "weber/error.hpp"

namespace weber::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

std::vector<double> ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) r[order[k]] = avg;
    i = j;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::shape_mismatch, "pearson: length mismatch");
  if (x.size() < 2) return 0.0;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (p <= 0.0) return -INFINITY;
  if (p >= 1.0) return INFINITY;
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_logistic(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double chi2_sf_df1(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

double correlation_p_two_sided(double r, std::size_t n) {
  if (n < 3) return 1.0;
  const double df = static_cast<double>(n - 2);
  if (std::abs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double binomial_test_two_sided(std::size_t k, std::size_t n, double p0) {
  if (n == 0) return 1.0;
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), p0);
  const double pk = boost::math::pdf(dist, static_cast<double>(k));
  // Sum of probabilities of outcomes no more likely than the observed one.
  double p = 0.0;
  const double tol = 1.0 + 1e-7;
  for (std::size_t i = 0; i <= n; ++i) {
    const double pi = boost::math::pdf(dist, static_cast<double>(i));
    if (pi <= pk * tol) p += pi;
  }
  return std::min(1.0, p);
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return NAN;
  if (sorted.size() == 1) return sorted[0];
  q = std::clamp(q, 0.0, 1.0);
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::shape_mismatch, "fit_line: length mismatch");
  if (x.size() < 2) throw Error(Errc::insufficient_data, "fit_line: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(Errc::zero_variance, "fit_line: predictor has zero variance");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.tss = syy;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
  }
  f.rss = rss;
  return f;
}

std::pair<double, double> spearman_exact_tails(double r, std::size_t n) {
  if (n < 2 || n > 12) throw Error(Errc::invalid_argument, "spearman_exact_tails: n must be in [2, 12]");
  const std::size_t max_s = n * (n * n - 1) / 3;
  const std::size_t states = std::size_t{1} << n;
  // counts[mask][s]: number of partial assignments of the first popcount(mask)
  // ranks to the positions in mask with squared-difference sum s.
  std::vector<double> counts(states * (max_s + 1), 0.0);
  counts[0] = 1.0;
  for (std::size_t mask = 0; mask < states; ++mask) {
    const auto i = static_cast<long>(std::popcount(mask));
    if (static_cast<std::size_t>(i) >= n) continue;
    const double* row = &counts[mask * (max_s + 1)];
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (mask & (std::size_t{1} << pos)) continue;
      const long d = static_cast<long>(pos) - i;
      const auto add = static_cast<std::size_t>(d * d);
      double* dst = &counts[(mask | (std::size_t{1} << pos)) * (max_s + 1)];
      for (std::size_t s = 0; s + add <= max_s; ++s) {
        if (row[s] != 0.0) dst[s + add] += row[s];
      }
    }
  }
  const double* full = &counts[(states - 1) * (max_s + 1)];
  double total = 0.0;
  for (std::size_t s = 0; s <= max_s; ++s) total += full[s];
  const double nn = static_cast<double>(n);
  const double s_obs = (1.0 - r) * nn * (nn * nn - 1.0) / 6.0;
  double le = 0.0, ge = 0.0;  // P(rho <= r) = P(S >= s_obs), P(rho >= r) = P(S <= s_obs)
  for (std::size_t s = 0; s <= max_s; ++s) {
    const double sd = static_cast<double>(s);
    if (sd >= s_obs - 1e-6) le += full[s];
    if (sd <= s_obs + 1e-6) ge += full[s];
  }
  return {le / total, ge / total};
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

}  // namespace weber::stats
