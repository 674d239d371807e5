#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/activation.hpp"

namespace weber::precision {

struct PrecisionPoint {
  double lower = 0.0;
  double upper = 0.0;
  double midpoint = 0.0;  // geometric mean of the pair
  double raw = 0.0;
  double normalised = 0.0;
  bool excluded = false;  // coincident centroids
};

struct PrecisionCurve {
  std::size_t layer = 0;
  std::vector<PrecisionPoint> points;
  double gradient_rho = 0.0;
  double gradient_p = 1.0;
  bool exact_p = false;
  double gamma = 0.0;
  double gamma_normalised = 0.0;
  std::size_t excluded = 0;

  bool negative_significant(double alpha = 0.05) const { return gradient_rho < 0.0 && gradient_p < alpha; }
};

// Two-sided p for Spearman's rho over n untied points: exact below 13, t
// approximation above.
double spearman_p(double rho, std::size_t n);

PrecisionCurve analyze_precision(const CentroidSet& cents, std::size_t layer);

struct H3Domain {
  std::size_t passing = 0;
  std::size_t evaluated = 0;
  bool pass = false;
};

struct H3Result {
  std::vector<H3Domain> domains;
  std::size_t domains_passing = 0;
  bool pass = false;
};

inline constexpr std::size_t kH3LayerThreshold = 17;
inline constexpr std::size_t kH3DomainThreshold = 2;

// One curve vector per domain; `expected_layers` guards against gaps.
H3Result evaluate_h3(std::span<const std::vector<PrecisionCurve>> domains, std::size_t expected_layers,
                     std::size_t layer_threshold = kH3LayerThreshold);

nlohmann::json to_json(const PrecisionCurve& c);
nlohmann::json to_json(const H3Result& r);

}  // namespace weber::precision
