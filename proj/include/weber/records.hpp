#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/stimulus.hpp"

namespace weber {

using stimulus::Position;

enum class Choice { A, B, invalid };

std::string_view to_string(Choice c);
Choice parse_choice(std::string_view s);

// One forced-choice trial. `baseline` and `ratio` are the design's nominal
// values, which key the analysis cells.
struct TrialRecord {
  int pair_id = 0;
  double baseline = 0.0;
  double ratio = 1.0;
  Position large_position = Position::A;
  Choice chosen = Choice::A;
  double p_a = 0.5;
  double p_b = 0.5;
  bool correct = false;
  double entropy_nats = 0.0;
  std::string task;
  std::string model;
};

struct TrialSet {
  std::vector<TrialRecord> trials;  // valid trials only
  std::size_t n_records = 0;
  std::size_t n_invalid = 0;
  double exclusion_fraction = 0.0;
};

TrialSet parse_trials(std::string_view jsonl);
TrialSet load_trials(const std::filesystem::path& path);
std::string trials_jsonl(std::span<const TrialRecord> trials);
nlohmann::json to_json(const TrialRecord& t);

struct PatchResult {
  std::string prompt_id;
  std::string direction_id;
  double dose = 0.0;
  double p_base = 0.0;
  double p_patched = 0.0;
  double delta_p = 0.0;
  bool symbolic = false;
};

std::vector<PatchResult> parse_patch_results(std::string_view jsonl);
std::vector<PatchResult> load_patch_results(const std::filesystem::path& path);
std::string patch_results_jsonl(std::span<const PatchResult> results);

nlohmann::json to_json(const PatchResult& r);

}  // namespace weber
