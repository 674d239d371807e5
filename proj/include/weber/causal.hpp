#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/activation.hpp"
#include "weber/records.hpp"

namespace weber::causal {

struct MagnitudeDirection {
  std::size_t layer = 0;
  std::vector<double> unit_vector;
  double ridge_lambda = 0.0;
  double probe_r2 = 0.0;
  double projection_span = 0.0;
  // In-sample R2 of 1 with more dimensions than stimuli says nothing.
  bool r2_degenerate = false;
};

// Ridge probe for ln(magnitude) on centred activations. Without `lambda` the
// default 1e-2 * trace(X'X) / dim is used.
MagnitudeDirection fit_magnitude_direction(const ActivationSet& acts, std::size_t layer,
                                           std::optional<double> lambda = std::nullopt);

struct PcaValidation {
  double pc1_logmag_r = 0.0;
  double pc1_dir_cos = 0.0;
  double explained = 0.0;
  bool pass = false;
};

PcaValidation pca_validate(const CentroidSet& cents, std::size_t layer, const MagnitudeDirection& dir);

struct PatchPlan {
  std::size_t layer = 0;
  MagnitudeDirection mag;
  std::vector<std::vector<double>> random;  // unit vectors
  std::vector<double> doses{0.25, 0.50, 0.75, 1.00};
  std::vector<std::string> prompt_ids;
  std::uint64_t seed = 0;
  std::string position = "magnitude_token";
  double max_random_cos = 0.0;
  bool near_orthogonal = true;

  std::size_t n_directions() const { return 1 + random.size(); }
  std::size_t planned_runs() const { return prompt_ids.size() * n_directions() * doses.size(); }
  std::string direction_id(std::size_t i) const;
  std::span<const double> direction(std::size_t i) const;
  // dose * projection_span * unit vector
  std::vector<double> offset(std::size_t direction_index, double dose) const;
};

PatchPlan build_patch_plan(const MagnitudeDirection& dir, std::vector<std::string> prompt_ids, std::uint64_t seed,
                           std::size_t n_random = 10);

WbractBlock plan_to_wbract(const PatchPlan& plan);
PatchPlan plan_from_wbract(const WbractBlock& block);

using weber::PatchResult;
using weber::parse_patch_results;
using weber::load_patch_results;
using weber::patch_results_jsonl;
using weber::to_json;

struct DoseRow {
  double dose = 0.0;
  double mag_mean_dp = 0.0;
  double mag_mean_abs_dp = 0.0;
  double rand_mean_abs_dp = 0.0;
};

struct PatchAnalysis {
  double dose = 0.0;
  double mag_mean_abs_dp = 0.0;
  double rand_mean_abs_dp = 0.0;
  double specificity = 0.0;
  bool dose_monotonic = false;
  bool sign_correct = false;
  double shift_fraction = 0.0;
  std::vector<DoseRow> dose_response;
};

// Summaries at `dose` (the largest dose present when unset). `expected_sign`
// is the direction in which p should move under the magnitude patch.
PatchAnalysis analyze_patch_results(std::span<const PatchResult> results, int expected_sign = 1,
                                    std::optional<double> dose = std::nullopt);

bool dose_monotonic(std::span<const double> means, int expected_sign);

struct H7Result {
  double shift_fraction = 0.0;
  bool pass = false;
  std::optional<double> baseline_accuracy;
  bool ceiling = false;
};

inline constexpr double kH7Threshold = 0.75;
inline constexpr double kCeilingAccuracy = 0.95;

H7Result evaluate_h7(double shift_fraction, std::optional<double> baseline_accuracy = std::nullopt);
H7Result evaluate_h7(std::span<const PatchResult> symbolic_results, int expected_sign = 1,
                     std::optional<double> baseline_accuracy = std::nullopt);

nlohmann::json to_json(const MagnitudeDirection& d, bool with_vector = false);
nlohmann::json to_json(const PcaValidation& v);
nlohmann::json to_json(const PatchAnalysis& a);
nlohmann::json to_json(const H7Result& h);

}  // namespace weber::causal
