#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/activation.hpp"
#include "weber/behaviour.hpp"
#include "weber/causal.hpp"
#include "weber/corpus.hpp"
#include "weber/geometry.hpp"
#include "weber/precision.hpp"

namespace weber::report {

// key = value lines, '#' comments, [section] headers that prefix keys with
// "section.". Values may be double-quoted.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Relative paths resolve against this directory.
  std::filesystem::path base_dir;
  std::filesystem::path path_of(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

enum class Verdict { pass, fail, partial, non_evaluable };
std::string_view to_string(Verdict v);

struct BehaviourSummary {
  std::size_t n_records = 0;
  double exclusion_fraction = 0.0;
  behaviour::AccuracyTable accuracy;
  double chance_p = 1.0;  // two-sided binomial test of overall accuracy against 0.5
  std::optional<behaviour::DevianceTest> deviance;
  std::optional<behaviour::PsychometricFit> fit;
  std::optional<behaviour::BcaInterval> wf_ci;
  std::optional<behaviour::LogisticModel> distance_ratio;
  behaviour::EntropyDiagnostic entropy;
  std::vector<std::string> errors;  // analyses that could not run, with reason
};

BehaviourSummary summarize_behaviour(const TrialSet& trials, int bootstrap, std::uint64_t seed);

struct DomainResults {
  std::string domain;
  std::size_t n_layers = 0;
  std::vector<geometry::LayerVerdict> layers;  // every metric, layer-major
  std::vector<precision::PrecisionCurve> precision;
  std::optional<BehaviourSummary> behaviour;
};

void analyze_geometry_into(DomainResults& d, const ActivationSet& acts, std::span<const geometry::Metric> metrics,
                           int permutations, std::uint64_t seed);

nlohmann::json to_json(const DomainResults& d);

struct CausalSummary {
  std::optional<causal::MagnitudeDirection> direction;
  causal::PatchAnalysis analysis;
  std::optional<causal::H7Result> h7;
};

struct CorpusSummary {
  corpus::MagnitudeHistogram histogram;
  std::optional<corpus::DistributionFit> fit;
};

struct ModelResults {
  std::string model;
  std::vector<DomainResults> domains;
  std::optional<CausalSummary> causal;
  std::optional<CorpusSummary> corpus;
  nlohmann::json controls;  // null when absent
};

struct Thresholds {
  std::size_t h1_layers = 9;
  std::optional<std::size_t> first_layer;
  std::optional<std::size_t> last_layer;
  double h1_domain_fraction = 2.0 / 3.0;
  double primary_alpha = 0.017;
  double secondary_alpha = 0.05;
  double wf_lo = 0.10;
  double wf_hi = 0.25;
  std::size_t h3_layers = precision::kH3LayerThreshold;
  geometry::Metric trend_metric = geometry::Metric::cosine;
};

struct HypothesisRow {
  std::string id;
  Verdict verdict = Verdict::non_evaluable;
  nlohmann::json detail;
};

std::vector<HypothesisRow> evaluate_hypotheses(const ModelResults& m, const Thresholds& t);

// Programme-level verdict for one hypothesis across models.
Verdict programme_verdict(std::span<const Verdict> per_model);

struct Report {
  std::vector<ModelResults> models;
  Thresholds thresholds;
  nlohmann::json settings = nlohmann::json::object();
};

nlohmann::json report_json(const Report& r);

// report.json plus rsa_by_layer, accuracy_by_ratio, precision_curves,
// dose_response and corpus_histogram CSV tables.
void emit_report(const Report& r, const std::filesystem::path& dir);

Report run_all(const Config& cfg);

}  // namespace weber::report
