#include "weber/controls.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/stats.hpp"

namespace weber::controls {

using nlohmann::json;

std::vector<std::size_t> hungarian(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw Error(Errc::shape_mismatch, "cost matrix is not n x n");
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation; column 0 is a sentinel
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

FrequencyMatch hungarian_frequency_match(std::span<const LogProb> numbers, std::span<const LogProb> nouns,
                                         double gate) {
  if (numbers.size() != nouns.size()) {
    throw Error(Errc::shape_mismatch,
                fmt::format("{} numbers but {} nouns; matching needs equal lists", numbers.size(), nouns.size()));
  }
  const std::size_t n = numbers.size();
  if (n < 2) throw Error(Errc::insufficient_data, "matching needs at least two items");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::abs(numbers[i].logprob - nouns[j].logprob);
  const auto assign = hungarian(cost, n);
  FrequencyMatch m;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.pairs.emplace_back(i, assign[i]);
    m.total_cost += cost[i * n + assign[i]];
    a[i] = numbers[i].logprob;
    b[i] = nouns[assign[i]].logprob;
  }
  m.matched_spearman = stats::spearman(a, b);
  m.gate_pass = m.matched_spearman > gate;
  return m;
}

namespace {

ActivationSet rekey_by_slot(const ActivationSet& acts) {
  std::vector<ManifestEntry> manifest = acts.manifest();
  for (auto& e : manifest) {
    if (!e.slot_magnitude) {
      throw Error(Errc::malformed_manifest, "shuffled set entry '" + e.stimulus_id + "' lacks slot_magnitude");
    }
    e.magnitude = *e.slot_magnitude;
    e.surface_form = "slot";
  }
  return ActivationSet(acts.n_layers(), acts.n_stimuli(), acts.dim(),
                       std::vector<float>(acts.tensor().begin(), acts.tensor().end()), std::move(manifest));
}

}  // namespace

ShuffleCheck shuffled_magnitude_check(const ActivationSet& original, const ActivationSet& shuffled, std::size_t layer,
                                      geometry::Metric metric) {
  std::vector<double> a, b;
  for (const auto& e : original.manifest()) a.push_back(e.magnitude);
  for (const auto& e : shuffled.manifest()) b.push_back(e.magnitude);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b || original.dim() != shuffled.dim() || original.n_layers() != shuffled.n_layers()) {
    throw Error(Errc::shape_mismatch, "shuffled set does not carry the original magnitudes");
  }
  const auto c_orig = compute_centroids(original);
  const auto c_id = compute_centroids(shuffled);
  const auto c_slot = compute_centroids(rekey_by_slot(shuffled));
  const auto r_orig = geometry::compute_rdm(c_orig, layer, metric);
  const auto r_id = geometry::compute_rdm(c_id, layer, metric);
  const auto r_slot = geometry::compute_rdm(c_slot, layer, metric);
  const auto theo = geometry::theoretical_rdm(c_id.magnitudes, geometry::ModelKind::weber);
  ShuffleCheck s;
  s.rho_identity = stats::spearman(r_id.upper(), theo.upper());
  s.rho_context = stats::spearman(r_slot.upper(), theo.upper());
  s.rho_original = stats::spearman(r_id.upper(), r_orig.upper());
  return s;
}

SingleTokenControl single_token_control(const geometry::Rdm& rdm_full, std::span<const std::size_t> subset) {
  if (subset.size() < 6) throw Error(Errc::insufficient_data, "single-token subset needs at least six magnitudes");
  std::vector<std::size_t> idx(subset.begin(), subset.end());
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end() || idx.back() >= rdm_full.n()) {
    throw Error(Errc::invalid_argument, "subset indices must be distinct and in range");
  }
  std::vector<double> mags, upper;
  for (std::size_t i : idx) mags.push_back(rdm_full.magnitudes[i]);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) upper.push_back(rdm_full.at(idx[a], idx[b]));
  const auto sub = geometry::rdm_from_upper(std::move(mags), upper, rdm_full.metric);
  SingleTokenControl s;
  s.subset_size = idx.size();
  s.r2_full = geometry::fit_geometry(rdm_full, geometry::ModelKind::weber).r2;
  s.r2_subset = idx.size() == rdm_full.n() ? s.r2_full : geometry::fit_geometry(sub, geometry::ModelKind::weber).r2;
  s.delta_r2 = s.r2_full - s.r2_subset;
  return s;
}

UnitBoundaryCheck classify_unit_boundary(double equiv, double diff) {
  UnitBoundaryCheck u;
  u.equiv_cross_unit_sim = equiv;
  u.diff_same_unit_sim = diff;
  u.form_specific = equiv < diff;
  u.fallback_trigger = equiv < kUnitFallbackCosine;
  return u;
}

namespace {

struct FormCentroid {
  std::string form;
  std::string unit;
  double magnitude = 0.0;
  std::vector<double> v;
};

std::string unit_of(const std::string& surface) {
  std::size_t i = 0;
  while (i < surface.size() && (std::isdigit(static_cast<unsigned char>(surface[i])) || surface[i] == '.')) ++i;
  while (i < surface.size() && surface[i] == ' ') ++i;
  return surface.substr(i);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa <= 0.0 || bb <= 0.0) throw Error(Errc::zero_norm, "zero centroid in unit-boundary check");
  return ab / std::sqrt(aa * bb);
}

}  // namespace

UnitBoundaryCheck unit_boundary_check(const ActivationSet& acts, std::size_t layer) {
  if (layer >= acts.n_layers()) throw Error(Errc::missing_layer, fmt::format("layer {} out of range", layer));
  std::map<std::string, FormCentroid> forms;
  std::map<std::string, std::size_t> counts;
  for (std::size_t s = 0; s < acts.n_stimuli(); ++s) {
    const auto& e = acts.manifest()[s];
    auto& f = forms[e.surface_form];
    if (f.v.empty()) {
      f.form = e.surface_form;
      f.unit = unit_of(e.surface_form);
      f.magnitude = e.magnitude;
      f.v.assign(acts.dim(), 0.0);
    } else if (f.magnitude != e.magnitude) {
      throw Error(Errc::malformed_manifest, "surface form '" + e.surface_form + "' maps to two magnitudes");
    }
    const auto r = acts.row(layer, s);
    for (std::size_t k = 0; k < r.size(); ++k) f.v[k] += r[k];
    ++counts[e.surface_form];
  }
  std::vector<FormCentroid> all;
  for (auto& [name, f] : forms) {
    for (auto& x : f.v) x /= static_cast<double>(counts[name]);
    all.push_back(std::move(f));
  }

  UnitBoundaryCheck out;
  std::vector<std::size_t> members;
  double equiv_sum = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i].unit == all[j].unit) continue;
      if (std::abs(all[i].magnitude - all[j].magnitude) > 1e-9 * std::max(1.0, all[i].magnitude)) continue;
      const double c = cosine(all[i].v, all[j].v);
      out.equivalent_pairs.push_back({all[i].form, all[j].form, c});
      equiv_sum += c;
      members.push_back(i);
      members.push_back(j);
    }
  }
  if (out.equivalent_pairs.empty()) throw Error(Errc::insufficient_data, "no equivalent-magnitude cross-unit pairs");
  double same_sum = 0.0;
  for (std::size_t i : members) {
    std::size_t best = all.size();
    double best_gap = INFINITY;
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (j == i || all[j].unit != all[i].unit || all[j].magnitude == all[i].magnitude) continue;
      const double gap = std::abs(std::log(all[j].magnitude) - std::log(all[i].magnitude));
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best == all.size()) continue;
    const double c = cosine(all[i].v, all[best].v);
    out.matched_same_unit.push_back({all[i].form, all[best].form, c});
    same_sum += c;
  }
  if (out.matched_same_unit.empty()) {
    throw Error(Errc::insufficient_data, "no same-unit partner for any equivalent pair member");
  }
  const auto cls = classify_unit_boundary(equiv_sum / static_cast<double>(out.equivalent_pairs.size()),
                                          same_sum / static_cast<double>(out.matched_same_unit.size()));
  out.equiv_cross_unit_sim = cls.equiv_cross_unit_sim;
  out.diff_same_unit_sim = cls.diff_same_unit_sim;
  out.form_specific = cls.form_specific;
  out.fallback_trigger = cls.fallback_trigger;
  return out;
}

json to_json(const FrequencyMatch& m) {
  json pairs = json::array();
  for (const auto& [a, b] : m.pairs) pairs.push_back({a, b});
  return {{"pairs", pairs}, {"total_cost", m.total_cost}, {"matched_spearman", m.matched_spearman},
          {"gate_pass", m.gate_pass}};
}

json to_json(const ShuffleCheck& s) {
  return {{"rho_identity", s.rho_identity}, {"rho_context", s.rho_context}, {"rho_original", s.rho_original}};
}

json to_json(const SingleTokenControl& s) {
  return {{"r2_full", s.r2_full}, {"r2_subset", s.r2_subset}, {"delta_r2", s.delta_r2}, {"subset_size", s.subset_size}};
}

json to_json(const UnitBoundaryCheck& u) {
  auto pairs = [](const std::vector<UnitPair>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({{"a", p.a}, {"b", p.b}, {"cosine", p.cosine}});
    return a;
  };
  return {{"equiv_cross_unit_sim", u.equiv_cross_unit_sim},
          {"diff_same_unit_sim", u.diff_same_unit_sim},
          {"form_specific", u.form_specific},
          {"fallback_trigger", u.fallback_trigger},
          {"equivalent_pairs", pairs(u.equivalent_pairs)},
          {"matched_same_unit", pairs(u.matched_same_unit)},
          {"matching_rule", "nearest log distance within the same unit"}};
}

}  // namespace weber::controls
