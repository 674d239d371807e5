#pragma once

#include <functional>
#include <span>
#include <vector>

namespace weber::optimize {

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

// Nelder-Mead downhill simplex. Converges when the spread of objective values
// across the simplex drops below `ftol`.
SimplexResult nelder_mead(const Objective& f, std::span<const double> start,
                          std::span<const double> step, double ftol = 1e-6, int max_evals = 20000);

// Golden-section minimisation of a unimodal function on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace weber::optimize
