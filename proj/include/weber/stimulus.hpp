#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace weber::stimulus {

enum class Domain { numerical, temporal, spatial };
enum class Task { b1_crossformat, b2_arithmetic, b3_contextual, symbolic_control };
enum class Position { A, B };

std::string_view to_string(Domain d);
std::string_view to_string(Task t);
std::string_view to_string(Position p);
Domain parse_domain(std::string_view s);
Task parse_task(std::string_view s);
Position parse_position(std::string_view s);

struct MagnitudeValue {
  Domain domain = Domain::numerical;
  double canonical = 0.0;  // count, seconds or metres
  std::string surface_form;
  std::string unit_label;
};

struct ProbeStimulus {
  std::string stimulus_id;
  MagnitudeValue value;
  int carrier_index = 0;
  std::string prompt_text;
  std::size_t span_begin = 0;  // byte offsets of surface_form in prompt_text
  std::size_t span_end = 0;
};

struct ComparisonPair {
  int pair_id = 0;
  double baseline_nominal = 0.0;
  double baseline_jittered = 0.0;
  double ratio_nominal = 0.0;
  MagnitudeValue small;
  MagnitudeValue large;
  Position large_position = Position::A;
  Task task = Task::b1_crossformat;
  int context_index = -1;  // B3 only
};

// Baseline/ratio grid of a comparison design. Everything here except the
// ratio endpoints and the cell count is a configurable stand-in.
struct PairDesign {
  std::vector<double> baselines;
  std::vector<double> ratios;
  int pairs_per_cell = 50;
  double jitter = 0.15;
};

PairDesign default_design(Domain domain);

// Probe magnitudes in canonical units, strictly increasing.
std::vector<MagnitudeValue> probe_values(Domain domain);
std::span<const std::string_view> carrier_templates(Domain domain);

std::vector<ProbeStimulus> build_probe_set(Domain domain);

bool supports(Domain domain, Task task);
std::vector<ComparisonPair> build_comparison_pairs(Domain domain, Task task, std::uint64_t seed,
                                                   const std::optional<PairDesign>& design = std::nullopt);

struct Prompt {
  int pair_id = 0;
  std::string text;
  std::string option_a;
  std::string option_b;
  // Token the model should emit to pick each option.
  std::string answer_a;
  std::string answer_b;
  Position correct = Position::A;
  bool labelled = true;
};

std::vector<Prompt> render_prompts(std::span<const ComparisonPair> pairs, bool labelled);

// English words for 0 <= n <= 9999 ("twenty-eight", "one hundred and five").
std::string number_to_words(long n);

// Format a canonical magnitude using the domain's natural unit ladder, choosing
// the largest unit in which the count stays at or above `min_count`.
MagnitudeValue natural_unit_value(Domain domain, double canonical, double min_count);

std::string probes_jsonl(Domain domain, std::span<const ProbeStimulus> probes);
std::string pairs_jsonl(Domain domain, Task task, std::uint64_t seed, bool labelled,
                        std::span<const ComparisonPair> pairs);

}  // namespace weber::stimulus
