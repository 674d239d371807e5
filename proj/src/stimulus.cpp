#include "weber/stimulus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "stimulus_tables.hpp"
#include "weber/error.hpp"
#include "weber/rng.hpp"

namespace weber::stimulus {

using nlohmann::json;

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::numerical: return "numerical";
    case Domain::temporal: return "temporal";
    case Domain::spatial: return "spatial";
  }
  return "?";
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::b1_crossformat: return "B1_crossformat";
    case Task::b2_arithmetic: return "B2_arithmetic";
    case Task::b3_contextual: return "B3_contextual";
    case Task::symbolic_control: return "symbolic_control";
  }
  return "?";
}

std::string_view to_string(Position p) { return p == Position::A ? "A" : "B"; }

Domain parse_domain(std::string_view s) {
  if (s == "numerical") return Domain::numerical;
  if (s == "temporal") return Domain::temporal;
  if (s == "spatial") return Domain::spatial;
  throw Error(Errc::invalid_argument, "unknown domain '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
  if (s == "B1_crossformat" || s == "B1" || s == "b1") return Task::b1_crossformat;
  if (s == "B2_arithmetic" || s == "B2" || s == "b2") return Task::b2_arithmetic;
  if (s == "B3_contextual" || s == "B3" || s == "b3") return Task::b3_contextual;
  if (s == "symbolic_control" || s == "symbolic") return Task::symbolic_control;
  throw Error(Errc::invalid_argument, "unknown task '" + std::string(s) + "'");
}

Position parse_position(std::string_view s) {
  if (s == "A") return Position::A;
  if (s == "B") return Position::B;
  throw Error(Errc::invalid_argument, "position must be A or B, got '" + std::string(s) + "'");
}

PairDesign default_design(Domain domain) {
  PairDesign d;
  d.ratios = {1.05, 1.15, 1.35, 1.65, 2.00, 3.00};
  switch (domain) {
    case Domain::numerical: d.baselines = {34, 72, 147, 310, 620}; break;
    case Domain::temporal: d.baselines = {45, 2400, 129600}; break;
    case Domain::spatial: d.baselines = {40, 650, 45000}; break;
  }
  return d;
}

std::vector<MagnitudeValue> probe_values(Domain domain) {
  std::vector<MagnitudeValue> out;
  for (const auto& e : tables::probes(domain)) {
    out.push_back({domain, e.canonical, std::string(e.surface), std::string(e.unit)});
  }
  return out;
}

std::span<const std::string_view> carrier_templates(Domain domain) { return tables::carriers(domain); }

std::vector<ProbeStimulus> build_probe_set(Domain domain) {
  const auto values = probe_values(domain);
  const auto carriers = tables::carriers(domain);
  std::vector<ProbeStimulus> out;
  out.reserve(values.size() * carriers.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (std::size_t c = 0; c < carriers.size(); ++c) {
      ProbeStimulus s;
      s.stimulus_id = fmt::format("{}-{:02}-c{}", to_string(domain).substr(0, 3), v, c);
      s.value = values[v];
      s.carrier_index = static_cast<int>(c);
      const std::string_view tpl = carriers[c];
      const auto hole = tpl.find("{}");
      s.prompt_text = std::string(tpl.substr(0, hole)) + s.value.surface_form + std::string(tpl.substr(hole + 2));
      s.span_begin = hole;
      s.span_end = hole + s.value.surface_form.size();
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string number_to_words(long n) {
  static constexpr std::array<std::string_view, 20> ones{
      "zero",    "one",     "two",       "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
  static constexpr std::array<std::string_view, 10> tens{"",      "",      "twenty",  "thirty", "forty",
                                                         "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n < 0 || n > 9999) throw Error(Errc::invalid_argument, "number_to_words: out of range");
  auto below_hundred = [&](long v) {
    if (v < 20) return std::string(ones[static_cast<std::size_t>(v)]);
    std::string s(tens[static_cast<std::size_t>(v / 10)]);
    if (v % 10) s += "-" + std::string(ones[static_cast<std::size_t>(v % 10)]);
    return s;
  };
  if (n < 100) return below_hundred(n);
  std::string out;
  if (n >= 1000) {
    out = std::string(ones[static_cast<std::size_t>(n / 1000)]) + " thousand";
    n %= 1000;
    if (n == 0) return out;
    out += n < 100 ? " and " : " ";
  }
  if (n >= 100) {
    out += std::string(ones[static_cast<std::size_t>(n / 100)]) + " hundred";
    n %= 100;
    if (n == 0) return out;
    out += " and ";
  }
  return out + below_hundred(n);
}

MagnitudeValue natural_unit_value(Domain domain, double canonical, double min_count) {
  const auto ladder = tables::unit_ladder(domain);
  const tables::Unit* unit = &ladder.front();
  for (const auto& u : ladder) {
    if (canonical / u.size >= min_count) unit = &u;
  }
  const double count = std::max(1.0, std::round(canonical / unit->size));
  MagnitudeValue v;
  v.domain = domain;
  v.canonical = count * unit->size;
  const auto whole = static_cast<long>(count);
  if (unit->singular.empty()) {
    v.surface_form = std::to_string(whole);
  } else {
    v.surface_form = std::to_string(whole) + " " + std::string(whole == 1 ? unit->singular : unit->plural);
    v.unit_label = std::string(unit->singular);
  }
  return v;
}

bool supports(Domain domain, Task task) {
  return domain == Domain::numerical || task == Task::b1_crossformat;
}

namespace {

constexpr double kRatioTolerance = 0.02;
constexpr double kMinUnitCount = 30.0;

enum class NumberFormat { digits, words, dozens };

std::string format_number(long v, NumberFormat f) {
  switch (f) {
    case NumberFormat::digits: return std::to_string(v);
    case NumberFormat::words: return number_to_words(v);
    case NumberFormat::dozens: return number_to_words(v / 12) + " dozen";
  }
  return {};
}

std::vector<NumberFormat> formats_for(long v) {
  std::vector<NumberFormat> f{NumberFormat::digits, NumberFormat::words};
  if (v % 12 == 0 && v / 12 <= 99) f.push_back(NumberFormat::dozens);
  return f;
}

MagnitudeValue count_value(double canonical) {
  const auto v = static_cast<long>(std::max(1.0, std::round(canonical)));
  return {Domain::numerical, static_cast<double>(v), std::to_string(v), ""};
}

// "p% of base" whose product is closest to target.
MagnitudeValue percent_value(double target, Rng& rng) {
  MagnitudeValue best;
  double best_err = INFINITY;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const long pct = 15 + static_cast<long>(rng.below(81));
    const long base = std::max(1L, std::lround(target * 100.0 / static_cast<double>(pct)));
    const double value = static_cast<double>(pct * base) / 100.0;
    const double err = std::abs(value / target - 1.0);
    if (err < best_err) {
      best_err = err;
      best = {Domain::numerical, value, std::to_string(pct) + "% of " + std::to_string(base), ""};
    }
    if (err <= 0.005) break;
  }
  return best;
}

void apply_crossformat(ComparisonPair& p, Rng& rng) {
  const auto small_v = static_cast<long>(p.small.canonical);
  const auto large_v = static_cast<long>(p.large.canonical);
  const auto fs = formats_for(small_v);
  const NumberFormat small_f = fs[rng.below(fs.size())];
  auto fl = formats_for(large_v);
  std::erase(fl, small_f);
  const NumberFormat large_f = fl[rng.below(fl.size())];
  p.small.surface_form = format_number(small_v, small_f);
  p.large.surface_form = format_number(large_v, large_f);
}

}  // namespace

std::vector<ComparisonPair> build_comparison_pairs(Domain domain, Task task, std::uint64_t seed,
                                                   const std::optional<PairDesign>& design_in) {
  if (!supports(domain, task)) {
    throw Error(Errc::unsupported_combination,
                fmt::format("task {} is not defined for the {} domain", to_string(task), to_string(domain)));
  }
  const PairDesign design = design_in.value_or(default_design(domain));
  if (design.baselines.empty() || design.ratios.empty() || design.pairs_per_cell <= 0) {
    throw Error(Errc::invalid_argument, "comparison design must have baselines, ratios and a positive cell size");
  }
  Rng rng(seed);
  std::vector<ComparisonPair> pairs;
  pairs.reserve(design.baselines.size() * design.ratios.size() * static_cast<std::size_t>(design.pairs_per_cell));
  int next_id = 0;
  std::size_t cell = 0;
  for (double baseline : design.baselines) {
    for (double ratio : design.ratios) {
      std::vector<Position> positions(static_cast<std::size_t>(design.pairs_per_cell));
      for (std::size_t k = 0; k < positions.size(); ++k) {
        // odd cell sizes alternate which side gets the extra item
        positions[k] = ((k + cell) % 2 == 0) ? Position::A : Position::B;
      }
      rng.shuffle(std::span(positions));
      for (int k = 0; k < design.pairs_per_cell; ++k) {
        ComparisonPair p;
        p.pair_id = next_id++;
        p.task = task;
        p.baseline_nominal = baseline;
        p.ratio_nominal = ratio;
        p.large_position = positions[static_cast<std::size_t>(k)];
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
          p.baseline_jittered = baseline * (1.0 + rng.uniform(-design.jitter, design.jitter));
          if (domain == Domain::numerical) {
            if (task == Task::b2_arithmetic) {
              p.small = percent_value(p.baseline_jittered, rng);
              p.large = percent_value(p.small.canonical * ratio, rng);
            } else {
              p.small = count_value(p.baseline_jittered);
              p.large = count_value(p.small.canonical * ratio);
            }
          } else {
            p.small = natural_unit_value(domain, p.baseline_jittered, kMinUnitCount);
            p.large = natural_unit_value(domain, p.small.canonical * ratio, kMinUnitCount);
          }
          const double actual = p.large.canonical / p.small.canonical;
          ok = std::abs(actual / ratio - 1.0) <= kRatioTolerance;
        }
        if (!ok) {
          throw Error(Errc::invalid_argument,
                      fmt::format("baseline {} cannot realise ratio {} within 2% after rounding", baseline, ratio));
        }
        if (domain == Domain::numerical && task == Task::b1_crossformat) apply_crossformat(p, rng);
        if (task == Task::b3_contextual) p.context_index = static_cast<int>(rng.below(tables::contexts().size()));
        pairs.push_back(std::move(p));
      }
      ++cell;
    }
  }
  return pairs;
}

std::vector<Prompt> render_prompts(std::span<const ComparisonPair> pairs, bool labelled) {
  std::vector<Prompt> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    Prompt pr;
    pr.pair_id = p.pair_id;
    pr.labelled = labelled;
    pr.correct = p.large_position;
    const auto& a = p.large_position == Position::A ? p.large : p.small;
    const auto& b = p.large_position == Position::A ? p.small : p.large;
    pr.option_a = a.surface_form;
    pr.option_b = b.surface_form;
    pr.answer_a = labelled ? "A" : a.surface_form;
    pr.answer_b = labelled ? "B" : b.surface_form;
    switch (p.task) {
      case Task::b1_crossformat:
        pr.text = labelled ? fmt::format("Which represents a larger quantity: A) {} or B) {}? Answer with A or B.",
                                         a.surface_form, b.surface_form)
                           : fmt::format("Which represents a larger quantity: {} or {}?", a.surface_form,
                                         b.surface_form);
        break;
      case Task::b2_arithmetic:
        pr.text = labelled ? fmt::format("Without calculating exactly, which is larger: A) {} or B) {}? Answer "
                                         "with A or B.",
                                         a.surface_form, b.surface_form)
                           : fmt::format("Without calculating exactly, which is larger: {} or {}?", a.surface_form,
                                         b.surface_form);
        break;
      case Task::b3_contextual: {
        const auto& frame = tables::contexts()[static_cast<std::size_t>(std::max(0, p.context_index))];
        std::string sentence(frame.sentence);
        sentence.replace(sentence.find("{first}"), 7, a.surface_form);
        sentence.replace(sentence.find("{second}"), 8, b.surface_form);
        pr.option_a = std::string(frame.label_first);
        pr.option_b = std::string(frame.label_second);
        if (labelled) {
          pr.text = fmt::format("{} {} A) {} or B) {}? Answer with A or B.", sentence,
                                frame.question.substr(0, frame.question.size() - 1), frame.label_first,
                                frame.label_second);
        } else {
          pr.text = fmt::format("{} {}", sentence, frame.question);
          pr.answer_a = std::string(frame.label_first);
          pr.answer_b = std::string(frame.label_second);
        }
        break;
      }
      case Task::symbolic_control:
        pr.text = labelled ? fmt::format("Which is larger: A) {} or B) {}? Answer with A or B.", a.surface_form,
                                         b.surface_form)
                           : fmt::format("Which is larger, {} or {}?", a.surface_form, b.surface_form);
        break;
    }
    out.push_back(std::move(pr));
  }
  return out;
}

namespace {

json value_json(const MagnitudeValue& v) {
  return {{"canonical_magnitude", v.canonical}, {"surface_form", v.surface_form}, {"unit_label", v.unit_label}};
}

json design_json(Domain domain) {
  const auto d = default_design(domain);
  return {{"baselines", d.baselines},
          {"ratios", d.ratios},
          {"pairs_per_cell", d.pairs_per_cell},
          {"jitter", d.jitter},
          {"note", "baselines, intermediate ratios, carriers 2-5 and task templates are configurable stand-ins"}};
}

}  // namespace

std::string probes_jsonl(Domain domain, std::span<const ProbeStimulus> probes) {
  std::string out;
  json header = {{"schema", "weber.stimuli/1"},
                 {"kind", "probe_set"},
                 {"domain", std::string(to_string(domain))},
                 {"count", probes.size()},
                 {"stand_ins", design_json(domain)}};
  out += header.dump() + "\n";
  for (const auto& s : probes) {
    json rec = {{"stimulus_id", s.stimulus_id},
                {"domain", std::string(to_string(domain))},
                {"value", value_json(s.value)},
                {"carrier_index", s.carrier_index},
                {"prompt_text", s.prompt_text},
                {"magnitude_char_span", {s.span_begin, s.span_end}}};
    out += rec.dump() + "\n";
  }
  return out;
}

std::string pairs_jsonl(Domain domain, Task task, std::uint64_t seed, bool labelled,
                        std::span<const ComparisonPair> pairs) {
  const auto prompts = render_prompts(pairs, labelled);
  std::string out;
  json header = {{"schema", "weber.stimuli/1"},
                 {"kind", "comparison_pairs"},
                 {"domain", std::string(to_string(domain))},
                 {"task", std::string(to_string(task))},
                 {"seed", seed},
                 {"labelled", labelled},
                 {"count", pairs.size()},
                 {"stand_ins", design_json(domain)}};
  out += header.dump() + "\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const auto& pr = prompts[i];
    json rec = {{"pair_id", p.pair_id},
                {"task", std::string(to_string(p.task))},
                {"baseline_nominal", p.baseline_nominal},
                {"baseline_jittered", p.baseline_jittered},
                {"ratio_nominal", p.ratio_nominal},
                {"small_value", value_json(p.small)},
                {"large_value", value_json(p.large)},
                {"large_position", std::string(to_string(p.large_position))},
                {"prompt", pr.text},
                {"option_a", pr.option_a},
                {"option_b", pr.option_b},
                {"answer_a", pr.answer_a},
                {"answer_b", pr.answer_b}};
    if (p.context_index >= 0) rec["context_index"] = p.context_index;
    out += rec.dump() + "\n";
  }
  return out;
}

}  // namespace weber::stimulus
