#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/activation.hpp"
#include "weber/geometry.hpp"

namespace weber::controls {

// Minimum-cost assignment on a square row-major cost matrix. Returns the
// column assigned to each row.
std::vector<std::size_t> hungarian(std::span<const double> cost, std::size_t n);

struct LogProb {
  std::string id;
  double logprob = 0.0;
};

struct FrequencyMatch {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (number index, noun index)
  double total_cost = 0.0;
  double matched_spearman = 0.0;
  bool gate_pass = false;
};

inline constexpr double kFrequencyGate = 0.85;

FrequencyMatch hungarian_frequency_match(std::span<const LogProb> numbers, std::span<const LogProb> nouns,
                                         double gate = kFrequencyGate);

struct ShuffleCheck {
  double rho_identity = 0.0;  // identity-keyed centroids vs log-distance RDM
  double rho_context = 0.0;   // slot-keyed centroids vs log-distance RDM
  double rho_original = 0.0;  // identity-keyed shuffled RDM vs original RDM
};

ShuffleCheck shuffled_magnitude_check(const ActivationSet& original, const ActivationSet& shuffled, std::size_t layer,
                                      geometry::Metric metric = geometry::Metric::cosine);

struct SingleTokenControl {
  double r2_full = 0.0;
  double r2_subset = 0.0;
  double delta_r2 = 0.0;
  std::size_t subset_size = 0;
};

// `subset` holds indices into rdm_full.magnitudes.
SingleTokenControl single_token_control(const geometry::Rdm& rdm_full, std::span<const std::size_t> subset);

struct UnitPair {
  std::string a;
  std::string b;
  double cosine = 0.0;
};

struct UnitBoundaryCheck {
  double equiv_cross_unit_sim = 0.0;
  double diff_same_unit_sim = 0.0;
  bool form_specific = false;
  bool fallback_trigger = false;
  std::vector<UnitPair> equivalent_pairs;
  std::vector<UnitPair> matched_same_unit;
};

inline constexpr double kUnitFallbackCosine = 0.70;

UnitBoundaryCheck classify_unit_boundary(double equiv_cross_unit_sim, double diff_same_unit_sim);

// Centroids are taken per surface form; the unit label is the surface form
// with its leading number removed.
UnitBoundaryCheck unit_boundary_check(const ActivationSet& acts, std::size_t layer);

nlohmann::json to_json(const FrequencyMatch& m);
nlohmann::json to_json(const ShuffleCheck& s);
nlohmann::json to_json(const SingleTokenControl& s);
nlohmann::json to_json(const UnitBoundaryCheck& u);

}  // namespace weber::controls
