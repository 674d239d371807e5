#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/stats.hpp"
#include "weber/records.hpp"
#include "weber/stimulus.hpp"

namespace weber::behaviour {

using stimulus::Position;

using weber::Choice;
using weber::TrialRecord;
using weber::TrialSet;
using weber::parse_trials;
using weber::load_trials;
using weber::trials_jsonl;
using weber::to_json;

struct AccuracyRow {
  double baseline = 0.0;  // NaN in the pooled-by-ratio table
  double ratio = 0.0;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  stats::Interval ci;
};

struct AccuracyTable {
  std::vector<AccuracyRow> by_ratio;
  std::vector<AccuracyRow> by_cell;
  double overall = 0.0;
  std::size_t n = 0;
};

AccuracyTable accuracy_by_ratio(std::span<const TrialRecord> trials);

enum class Predictor { log_ratio, abs_diff };
std::string_view to_string(Predictor p);

struct DevianceTest {
  double deviance_log = 0.0;
  double deviance_abs = 0.0;
  double delta_dev = 0.0;  // deviance(abs_diff) - deviance(log_ratio)
  double p = 1.0;
  Predictor winner = Predictor::log_ratio;
  bool separated = false;
};

// Upper chi-square(1) tail of |delta|.
double deviance_p(double delta);

DevianceTest delta_deviance_test(std::span<const TrialRecord> trials);

enum class WfStatus { finite, infinite, below_range };
std::string_view to_string(WfStatus s);

struct PsychometricFit {
  double slope = 0.0;
  double lapse = 0.0;
  double position_bias = 0.0;
  double wf = 0.0;
  WfStatus status = WfStatus::finite;
  double deviance = 0.0;
  int restarts = 0;

  // Probability of a correct response at `ratio` with the larger option at A
  // (sign +1) or B (sign -1).
  double predict(double ratio, int position_sign) const;
};

// Trials collapsed to (ratio, position) cells with correct/total counts.
struct CellCounts {
  std::vector<double> log_ratio;
  std::vector<int> position_sign;
  std::vector<double> correct;
  std::vector<double> total;
};

CellCounts tally(std::span<const TrialRecord> trials);
PsychometricFit fit_psychometric(const CellCounts& cells);
PsychometricFit fit_psychometric(std::span<const TrialRecord> trials);

enum class Statistic { wf, accuracy };
Statistic parse_statistic(std::string_view s);

struct BcaInterval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double z0 = 0.0;
  double acceleration = 0.0;
  int replicates = 0;
  std::size_t undefined = 0;
  bool unstable = false;
};

BcaInterval bca_ci(std::span<const TrialRecord> trials, Statistic statistic, int B, std::uint64_t seed,
                   double level = 0.95);

struct EntropyDiagnostic {
  double mean_entropy = 0.0;
  bool approximate = false;
};

inline constexpr double kEntropyThreshold = 0.20;

EntropyDiagnostic entropy_diagnostic(std::span<const TrialRecord> trials);

struct DprimeCell {
  double baseline = 0.0;
  double ratio = 0.0;
  std::size_t n = 0;
  double p_correct = 0.0;
  double dprime = 0.0;
};

struct DprimeProfile {
  std::vector<DprimeCell> cells;
  std::vector<double> ratios;
  std::vector<double> cv_by_ratio;
  double mean_cv = 0.0;
  std::size_t skipped_cells = 0;
};

// 2AFC sensitivity with p clipped to [1/(2n), 1 - 1/(2n)].
double dprime_2afc(double p_correct, std::size_t n);

DprimeProfile dprime_profile(std::span<const TrialRecord> trials, std::size_t min_cell = 10);

struct WaldTerm {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
};

struct LogisticModel {
  std::vector<WaldTerm> terms;
  double deviance = 0.0;
  bool converged = false;
};

// Trial-level logistic regression of correctness on standardised |difference|,
// standardised ln ratio, their product and the position term.
LogisticModel distance_ratio_model(std::span<const TrialRecord> trials);

// Grouped-binomial logistic regression by IRLS. `x` holds one row per cell
// without an intercept column; one is added and reported first.
LogisticModel logistic_irls(const std::vector<std::vector<double>>& x, std::span<const double> successes,
                            std::span<const double> totals, std::span<const std::string> names);

nlohmann::json to_json(const AccuracyTable& t);
nlohmann::json to_json(const DevianceTest& d);
nlohmann::json to_json(const PsychometricFit& f);
nlohmann::json to_json(const BcaInterval& b);
nlohmann::json to_json(const EntropyDiagnostic& e);
nlohmann::json to_json(const DprimeProfile& d);
nlohmann::json to_json(const LogisticModel& m);

}  // namespace weber::behaviour
