#include "weber/precision.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/stats.hpp"

namespace weber::precision {

using nlohmann::json;

double spearman_p(double rho, std::size_t n) {
  if (n < 3) return 1.0;
  if (n <= 12) {
    const auto [lower, upper] = stats::spearman_exact_tails(rho, n);
    return std::min(1.0, 2.0 * std::min(lower, upper));
  }
  return stats::correlation_p_two_sided(rho, n);
}

PrecisionCurve analyze_precision(const CentroidSet& cents, std::size_t layer) {
  if (layer >= cents.n_layers) throw Error(Errc::missing_layer, fmt::format("layer {} out of range", layer));
  const std::size_t n = cents.n_magnitudes();
  if (n < 3) throw Error(Errc::insufficient_data, "precision curve needs at least three magnitudes");
  PrecisionCurve c;
  c.layer = layer;
  std::vector<double> mid, raw, norm;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto a = cents.row(layer, i);
    const auto b = cents.row(layer, i + 1);
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d += (b[k] - a[k]) * (b[k] - a[k]);
    d = std::sqrt(d);
    PrecisionPoint p;
    p.lower = cents.magnitudes[i];
    p.upper = cents.magnitudes[i + 1];
    p.midpoint = std::sqrt(p.lower * p.upper);
    if (d > 0.0) {
      p.raw = 1.0 / d;
      p.normalised = p.raw * (std::log(p.upper) - std::log(p.lower));
      mid.push_back(p.midpoint);
      raw.push_back(p.raw);
      norm.push_back(p.normalised);
    } else {
      p.raw = INFINITY;
      p.normalised = INFINITY;
      p.excluded = true;
      ++c.excluded;
    }
    c.points.push_back(p);
  }
  if (raw.size() < 3) throw Error(Errc::insufficient_data, "fewer than three finite precision points");

  const bool flat = std::all_of(raw.begin(), raw.end(),
                                [&](double v) { return std::abs(v - raw.front()) <= 1e-9 * std::abs(raw.front()); });
  if (flat) {
    c.gradient_rho = 0.0;
    c.gradient_p = 1.0;
  } else {
    c.gradient_rho = stats::spearman(mid, raw);
    c.gradient_p = spearman_p(c.gradient_rho, raw.size());
  }
  c.exact_p = raw.size() <= 12;

  std::vector<double> x(mid.size()), ly(raw.size()), ln(norm.size());
  for (std::size_t i = 0; i < mid.size(); ++i) {
    x[i] = -std::log(mid[i]);
    ly[i] = std::log(raw[i]);
    ln[i] = std::log(norm[i]);
  }
  c.gamma = stats::fit_line(x, ly).slope;
  c.gamma_normalised = stats::fit_line(x, ln).slope;
  return c;
}

H3Result evaluate_h3(std::span<const std::vector<PrecisionCurve>> domains, std::size_t expected_layers,
                     std::size_t layer_threshold) {
  H3Result r;
  for (const auto& curves : domains) {
    if (curves.size() < expected_layers) {
      throw Error(Errc::missing_layer,
                  fmt::format("precision curves cover {} layers, expected {}", curves.size(), expected_layers));
    }
    H3Domain d;
    d.evaluated = curves.size();
    for (const auto& c : curves)
      if (c.negative_significant()) ++d.passing;
    d.pass = d.passing >= layer_threshold;
    if (d.pass) ++r.domains_passing;
    r.domains.push_back(d);
  }
  r.pass = r.domains_passing >= kH3DomainThreshold;
  return r;
}

json to_json(const PrecisionCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) {
    json j = {{"lower", p.lower}, {"upper", p.upper}, {"midpoint", p.midpoint}, {"excluded", p.excluded}};
    j["raw"] = p.excluded ? json(nullptr) : json(p.raw);
    j["normalised"] = p.excluded ? json(nullptr) : json(p.normalised);
    pts.push_back(std::move(j));
  }
  return {{"layer", c.layer},
          {"points", pts},
          {"gradient_rho", c.gradient_rho},
          {"gradient_p", c.gradient_p},
          {"exact_p", c.exact_p},
          {"gamma", c.gamma},
          {"gamma_normalised", c.gamma_normalised},
          {"excluded", c.excluded},
          {"negative_significant", c.negative_significant()}};
}

json to_json(const H3Result& r) {
  json doms = json::array();
  for (const auto& d : r.domains) doms.push_back({{"passing", d.passing}, {"evaluated", d.evaluated}, {"pass", d.pass}});
  return {{"domains", doms}, {"domains_passing", r.domains_passing}, {"pass", r.pass}};
}

}  // namespace weber::precision
