#include "weber/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/stats.hpp"

namespace weber {

using nlohmann::json;

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::A: return "A";
    case Choice::B: return "B";
    case Choice::invalid: return "invalid";
  }
  return "?";
}

Choice parse_choice(std::string_view s) {
  if (s == "A") return Choice::A;
  if (s == "B") return Choice::B;
  if (s == "invalid") return Choice::invalid;
  throw Error(Errc::malformed_record, fmt::format("unknown choice '{}'", s));
}

namespace {

TrialRecord parse_record(const json& j, std::size_t line) {
  auto fail = [line](const std::string& what) {
    return Error(Errc::malformed_record, fmt::format("trial log line {}: {}", line, what));
  };
  if (!j.is_object()) throw fail("record is not an object");
  TrialRecord t;
  try {
    t.pair_id = j.at("pair_id").get<int>();
    t.baseline = j.at("baseline").get<double>();
    t.ratio = j.at("ratio").get<double>();
    t.large_position = stimulus::parse_position(j.at("large_position").get<std::string>());
    t.chosen = parse_choice(j.at("chosen").get<std::string>());
    t.p_a = j.at("p_a").get<double>();
    t.p_b = j.at("p_b").get<double>();
    t.task = j.value("task", std::string());
    t.model = j.value("model", std::string());
  } catch (const json::exception& e) {
    throw fail(e.what());
  } catch (const Error& e) {
    throw fail(e.what());
  }
  if (!(t.baseline > 0.0)) throw fail("baseline must be positive");
  if (!(t.ratio > 1.0)) throw fail("ratio must exceed 1");
  const double s = t.p_a + t.p_b;
  if (!std::isfinite(s) || t.p_a < 0.0 || t.p_b < 0.0 || !(s > 0.0)) {
    throw Error(Errc::not_normalisable, fmt::format("trial log line {}: option probabilities cannot be normalised", line));
  }
  t.p_a /= s;
  t.p_b /= s;
  t.entropy_nats = stats::binary_entropy(t.p_a);
  const Choice right = t.large_position == Position::A ? Choice::A : Choice::B;
  t.correct = t.chosen == right;
  if (j.contains("correct") && t.chosen != Choice::invalid && j["correct"].is_boolean() &&
      j["correct"].get<bool>() != t.correct) {
    throw fail("'correct' disagrees with chosen and large_position");
  }
  return t;
}

}  // namespace

TrialSet parse_trials(std::string_view jsonl) {
  TrialSet set;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const auto end = std::min(jsonl.find('\n', pos), jsonl.size());
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::malformed_record, fmt::format("trial log line {}: {}", line_no, e.what()));
    }
    if (j.is_object() && j.contains("schema") && !j.contains("pair_id")) continue;
    auto t = parse_record(j, line_no);
    ++set.n_records;
    if (t.chosen == Choice::invalid) {
      ++set.n_invalid;
    } else {
      set.trials.push_back(std::move(t));
    }
  }
  if (set.n_records == 0) throw Error(Errc::empty_input, "trial log holds no records");
  set.exclusion_fraction = static_cast<double>(set.n_invalid) / static_cast<double>(set.n_records);
  return set;
}

TrialSet load_trials(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trials(ss.str());
}

json to_json(const TrialRecord& t) {
  json j = {{"pair_id", t.pair_id},
            {"baseline", t.baseline},
            {"ratio", t.ratio},
            {"large_position", stimulus::to_string(t.large_position)},
            {"chosen", to_string(t.chosen)},
            {"p_a", t.p_a},
            {"p_b", t.p_b},
            {"correct", t.correct},
            {"entropy_nats", t.entropy_nats}};
  if (!t.task.empty()) j["task"] = t.task;
  if (!t.model.empty()) j["model"] = t.model;
  return j;
}

std::string trials_jsonl(std::span<const TrialRecord> trials) {
  std::string out;
  for (const auto& t : trials) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<PatchResult> parse_patch_results(std::string_view jsonl) {
  std::vector<PatchResult> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < jsonl.size()) {
    const auto end = std::min(jsonl.find('\n', pos), jsonl.size());
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("schema") && !j.contains("direction_id")) continue;
      PatchResult r;
      const auto& id = j.at("prompt_id");
      r.prompt_id = id.is_string() ? id.get<std::string>() : id.dump();
      r.direction_id = j.at("direction_id").get<std::string>();
      r.dose = j.at("dose").get<double>();
      r.p_base = j.at("p_chosen_base").get<double>();
      r.p_patched = j.at("p_chosen_patched").get<double>();
      r.symbolic = j.value("symbolic", false);
      if (!(r.p_base >= 0.0 && r.p_base <= 1.0 && r.p_patched >= 0.0 && r.p_patched <= 1.0)) {
        throw Error(Errc::malformed_record, fmt::format("patch result line {}: probability outside [0, 1]", line_no));
      }
      r.delta_p = r.p_patched - r.p_base;
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(Errc::malformed_record, fmt::format("patch result line {}: {}", line_no, e.what()));
    }
  }
  if (out.empty()) throw Error(Errc::empty_input, "patch result log holds no records");
  return out;
}

std::vector<PatchResult> load_patch_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_patch_results(ss.str());
}

json to_json(const PatchResult& r) {
  json j = {{"prompt_id", r.prompt_id}, {"direction_id", r.direction_id}, {"dose", r.dose},
            {"p_chosen_base", r.p_base}, {"p_chosen_patched", r.p_patched}, {"delta_p", r.delta_p}};
  if (r.symbolic) j["symbolic"] = true;
  return j;
}

std::string patch_results_jsonl(std::span<const PatchResult> results) {
  std::string out;
  for (const auto& r : results) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace weber
