#include "weber/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace weber::optimize {

SimplexResult nelder_mead(const Objective& f, std::span<const double> start,
                          std::span<const double> step, double ftol, int max_evals) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evals;
    const double v = f(p);
    return std::isfinite(v) ? v : INFINITY;
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol) {
      converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + (centroid[i] - pts[worst][i]);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      for (std::size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + 2.0 * (centroid[i] - pts[worst][i]);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t i = 0; i < n; ++i) {
      trial2[i] = outside ? centroid[i] + 0.5 * (trial[i] - centroid[i])
                          : centroid[i] + 0.5 * (pts[worst][i] - centroid[i]);
    }
    const double fc = eval(trial2);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    // shrink toward best
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
      vals[k] = eval(pts[k]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals, converged};
}

double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace weber::optimize
