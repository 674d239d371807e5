#include "weber/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "weber/controls.hpp"
#include "weber/error.hpp"
#include "weber/stats.hpp"
#include "weber/stimulus.hpp"
#include "weber/synthetic.hpp"

namespace weber::report {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_num(double x) { return std::isfinite(x) ? fmt::format("{}", x) : std::string(); }

}  // namespace

Config Config::parse(std::string_view text) {
  Config c;
  std::string section;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quotes = !in_quotes;
      if (line[i] == '#' && !in_quotes) {
        line = trim(std::string_view(line).substr(0, i));
        break;
      }
    }
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::invalid_argument, fmt::format("config line {}: unclosed section", line_no));
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::invalid_argument, fmt::format("config line {}: expected key = value", line_no));
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw Error(Errc::invalid_argument, fmt::format("config line {}: empty key", line_no));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    c.values_[key] = value;
    if (end == text.size()) break;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto c = parse(ss.str());
  c.base_dir = path.parent_path();
  return c;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::invalid_argument, fmt::format("config key '{}' is required", key));
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, fmt::format("config key '{}': '{}' is not a number", key, it->second));
  }
}

long Config::get_int(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, fmt::format("config key '{}': '{}' is not an integer", key, it->second));
  }
}

std::vector<std::string> Config::get_list(const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  std::string_view s = it->second;
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto end = std::min(s.find(',', pos), s.size());
    auto item = trim(s.substr(pos, end - pos));
    if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') && item.back() == item.front()) {
      item = item.substr(1, item.size() - 2);
    }
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

std::filesystem::path Config::path_of(const std::string& key) const {
  std::filesystem::path p = require(key);
  return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::partial: return "PARTIAL";
    case Verdict::non_evaluable: return "NON-EVALUABLE";
  }
  return "?";
}

BehaviourSummary summarize_behaviour(const TrialSet& set, int bootstrap, std::uint64_t seed) {
  BehaviourSummary b;
  b.n_records = set.n_records;
  b.exclusion_fraction = set.exclusion_fraction;
  const auto& trials = set.trials;
  if (trials.empty()) {
    b.errors.push_back("no valid trials");
    return b;
  }
  b.accuracy = behaviour::accuracy_by_ratio(trials);
  const auto correct = static_cast<std::size_t>(std::llround(b.accuracy.overall * static_cast<double>(b.accuracy.n)));
  b.chance_p = stats::binomial_test_two_sided(correct, b.accuracy.n, 0.5);
  b.entropy = behaviour::entropy_diagnostic(trials);
  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      b.errors.push_back(fmt::format("{}: {}", what, e.what()));
    }
  };
  attempt("deviance", [&] { b.deviance = behaviour::delta_deviance_test(trials); });
  attempt("psychometric", [&] { b.fit = behaviour::fit_psychometric(trials); });
  if (bootstrap > 0) {
    attempt("bootstrap", [&] { b.wf_ci = behaviour::bca_ci(trials, behaviour::Statistic::wf, bootstrap, seed); });
  }
  attempt("distance_ratio", [&] { b.distance_ratio = behaviour::distance_ratio_model(trials); });
  return b;
}

void analyze_geometry_into(DomainResults& d, const ActivationSet& acts, std::span<const geometry::Metric> metrics,
                           int permutations, std::uint64_t seed) {
  const auto cents = compute_centroids(acts);
  d.n_layers = acts.n_layers();
  d.layers.clear();
  d.precision.clear();
  for (std::size_t l = 0; l < acts.n_layers(); ++l) {
    for (auto m : metrics) d.layers.push_back(geometry::analyze_layer(cents, l, m, permutations, seed));
    d.precision.push_back(precision::analyze_precision(cents, l));
  }
}

namespace {

std::vector<geometry::LayerVerdict> for_metric(const DomainResults& d, geometry::Metric m) {
  std::vector<geometry::LayerVerdict> out;
  for (const auto& v : d.layers)
    if (v.metric == m) out.push_back(v);
  return out;
}

std::vector<geometry::Metric> metrics_of(const DomainResults& d) {
  std::vector<geometry::Metric> out;
  for (const auto& v : d.layers)
    if (std::find(out.begin(), out.end(), v.metric) == out.end()) out.push_back(v.metric);
  return out;
}

const DomainResults* primary_behaviour(const ModelResults& m) {
  const DomainResults* first = nullptr;
  for (const auto& d : m.domains) {
    if (!d.behaviour) continue;
    if (d.domain == "numerical") return &d;
    if (!first) first = &d;
  }
  return first;
}

HypothesisRow eval_h1(const ModelResults& m, const Thresholds& t) {
  HypothesisRow row{"H1", Verdict::non_evaluable, json::object()};
  json doms = json::object();
  std::size_t evaluated = 0, passing = 0;
  for (const auto& d : m.domains) {
    if (d.layers.empty()) continue;
    const std::size_t first = t.first_layer.value_or(0);
    const std::size_t last = t.last_layer.value_or(d.n_layers - 1);
    json metrics = json::object();
    bool all = true;
    try {
      for (auto metric : metrics_of(d)) {
        const auto v = for_metric(d, metric);
        const auto h = geometry::evaluate_h1(v, first, last, t.h1_layers);
        metrics[std::string(geometry::to_string(metric))] = geometry::to_json(h);
        all = all && h.pass;
      }
    } catch (const Error& e) {
      doms[d.domain] = {{"error", e.what()}};
      continue;
    }
    ++evaluated;
    if (all) ++passing;
    doms[d.domain] = {{"metrics", metrics}, {"pass", all}};
  }
  row.detail = {{"domains", doms}, {"domains_evaluated", evaluated}, {"domains_passing", passing}};
  if (evaluated == 0) return row;
  row.verdict = static_cast<double>(passing) >= t.h1_domain_fraction * static_cast<double>(evaluated) - 1e-12
                    ? Verdict::pass
                    : Verdict::fail;
  return row;
}

HypothesisRow eval_h2(const ModelResults& m, const Thresholds& t) {
  HypothesisRow row{"H2", Verdict::non_evaluable, json::object()};
  const auto* d = primary_behaviour(m);
  if (!d || !d->behaviour->deviance || !d->behaviour->fit) return row;
  const auto& dev = *d->behaviour->deviance;
  const auto& fit = *d->behaviour->fit;
  const bool sig = dev.p < t.primary_alpha;
  const bool log_wins = dev.winner == behaviour::Predictor::log_ratio;
  const bool wf_ok = fit.status == behaviour::WfStatus::finite && fit.wf >= t.wf_lo && fit.wf <= t.wf_hi;
  row.detail = {{"domain", d->domain},          {"delta_dev", dev.delta_dev},
                {"p", dev.p},                   {"winner", behaviour::to_string(dev.winner)},
                {"wf", finite_or_null(fit.wf)}, {"wf_status", behaviour::to_string(fit.status)},
                {"wf_range", {t.wf_lo, t.wf_hi}}};
  row.verdict = sig && log_wins && wf_ok ? Verdict::pass : Verdict::fail;
  return row;
}

HypothesisRow eval_h3(const ModelResults& m, const Thresholds& t) {
  HypothesisRow row{"H3", Verdict::non_evaluable, json::object()};
  std::vector<std::vector<precision::PrecisionCurve>> curves;
  std::size_t layers = 0;
  json names = json::array();
  for (const auto& d : m.domains) {
    if (d.precision.empty()) continue;
    curves.push_back(d.precision);
    layers = std::max(layers, d.n_layers);
    names.push_back(d.domain);
  }
  if (curves.empty()) return row;
  try {
    const auto h = precision::evaluate_h3(curves, layers, t.h3_layers);
    row.detail = precision::to_json(h);
    row.detail["domain_names"] = names;
    row.verdict = h.pass ? Verdict::pass : Verdict::fail;
  } catch (const Error& e) {
    row.detail = {{"error", e.what()}};
  }
  return row;
}

HypothesisRow eval_h4(const ModelResults& m, const Thresholds& t) {
  HypothesisRow row{"H4", Verdict::non_evaluable, json::object()};
  json doms = json::object();
  struct Ci {
    std::string domain;
    double lo, hi;
  };
  std::vector<Ci> usable;
  std::size_t with_behaviour = 0;
  for (const auto& d : m.domains) {
    if (!d.behaviour) continue;
    ++with_behaviour;
    const auto& b = *d.behaviour;
    const bool above = b.accuracy.overall > 0.5 && b.chance_p <= t.secondary_alpha;
    json j = {{"accuracy", b.accuracy.overall}, {"chance_p", b.chance_p}, {"above_chance", above}};
    if (b.wf_ci) j["wf_ci"] = {finite_or_null(b.wf_ci->lo), finite_or_null(b.wf_ci->hi)};
    if (above && b.wf_ci && std::isfinite(b.wf_ci->lo) && std::isfinite(b.wf_ci->hi) && !b.wf_ci->unstable) {
      usable.push_back({d.domain, b.wf_ci->lo, b.wf_ci->hi});
    }
    doms[d.domain] = j;
  }
  row.detail = {{"domains", doms}};
  if (usable.size() < 2) {
    row.detail["reason"] = with_behaviour < 2 ? "fewer than two domains with behaviour"
                                              : "fewer than two domains above chance with a stable interval";
    return row;
  }
  bool differ = false;
  for (std::size_t i = 0; i < usable.size(); ++i)
    for (std::size_t j = i + 1; j < usable.size(); ++j)
      if (usable[i].hi < usable[j].lo || usable[j].hi < usable[i].lo) differ = true;
  row.verdict = differ ? Verdict::pass : Verdict::fail;
  return row;
}

HypothesisRow eval_h5(const ModelResults& m, const Thresholds& t) {
  HypothesisRow row{"H5", Verdict::non_evaluable, json::object()};
  json doms = json::object();
  std::size_t evaluated = 0, passing = 0;
  for (const auto& d : m.domains) {
    const auto v = for_metric(d, t.trend_metric);
    if (v.size() < 3) continue;
    std::vector<double> layer, diff;
    for (const auto& x : v) {
      layer.push_back(static_cast<double>(x.layer));
      diff.push_back(x.rsa_for(geometry::ModelKind::weber).rho - x.rsa_for(geometry::ModelKind::linear).rho);
    }
    const bool flat = std::all_of(diff.begin(), diff.end(), [&](double x) { return x == diff.front(); });
    const double rho = flat ? 0.0 : stats::spearman(layer, diff);
    const double p = flat ? 1.0 : precision::spearman_p(rho, layer.size());
    const bool pass = rho < 0.0 && p < t.secondary_alpha;
    ++evaluated;
    if (pass) ++passing;
    doms[d.domain] = {{"rho", rho}, {"p", p}, {"layers", layer.size()}, {"pass", pass}};
  }
  row.detail = {{"domains", doms}, {"metric", geometry::to_string(t.trend_metric)}};
  if (evaluated == 0) return row;
  row.verdict = passing > 0 ? Verdict::pass : Verdict::fail;
  return row;
}

HypothesisRow eval_h6(const ModelResults& m, const Thresholds& t) {
  HypothesisRow row{"H6", Verdict::non_evaluable, json::object()};
  const auto* d = primary_behaviour(m);
  if (!d || !d->behaviour->distance_ratio) return row;
  const auto& model = *d->behaviour->distance_ratio;
  std::size_t sig = 0, wanted = 0;
  json terms = json::object();
  for (const auto& term : model.terms) {
    if (term.name != "distance" && term.name != "ratio" && term.name != "interaction") continue;
    ++wanted;
    const bool s = term.p < t.secondary_alpha;
    if (s) ++sig;
    terms[term.name] = {{"estimate", term.estimate}, {"p", term.p}, {"significant", s}};
  }
  row.detail = {{"domain", d->domain}, {"terms", terms}, {"converged", model.converged}};
  if (wanted == 0) return row;
  row.verdict = sig == wanted ? Verdict::pass : sig == 0 ? Verdict::fail : Verdict::partial;
  return row;
}

HypothesisRow eval_h7(const ModelResults& m) {
  HypothesisRow row{"H7", Verdict::non_evaluable, json::object()};
  if (!m.causal || !m.causal->h7) return row;
  row.detail = causal::to_json(*m.causal->h7);
  row.verdict = m.causal->h7->pass ? Verdict::pass : Verdict::fail;
  return row;
}

json domain_json(const DomainResults& d) {
  json j = {{"domain", d.domain}, {"n_layers", d.n_layers}};
  if (d.layers.empty()) {
    j["geometry"] = nullptr;
  } else {
    json layers = json::array();
    for (const auto& v : d.layers) layers.push_back(geometry::to_json(v));
    j["geometry"] = layers;
  }
  if (d.precision.empty()) {
    j["precision"] = nullptr;
  } else {
    json curves = json::array();
    for (const auto& c : d.precision) curves.push_back(precision::to_json(c));
    j["precision"] = curves;
  }
  if (!d.behaviour) {
    j["behaviour"] = nullptr;
  } else {
    const auto& b = *d.behaviour;
    json bj = {{"n_records", b.n_records},
               {"exclusion_fraction", b.exclusion_fraction},
               {"accuracy", behaviour::to_json(b.accuracy)},
               {"chance_p", b.chance_p},
               {"entropy", behaviour::to_json(b.entropy)},
               {"errors", b.errors}};
    bj["deviance"] = b.deviance ? behaviour::to_json(*b.deviance) : json(nullptr);
    bj["psychometric"] = b.fit ? behaviour::to_json(*b.fit) : json(nullptr);
    bj["wf_ci"] = b.wf_ci ? behaviour::to_json(*b.wf_ci) : json(nullptr);
    bj["distance_ratio"] = b.distance_ratio ? behaviour::to_json(*b.distance_ratio) : json(nullptr);
    j["behaviour"] = bj;
  }
  return j;
}

}  // namespace

json to_json(const DomainResults& d) { return domain_json(d); }

std::vector<HypothesisRow> evaluate_hypotheses(const ModelResults& m, const Thresholds& t) {
  return {eval_h1(m, t), eval_h2(m, t), eval_h3(m, t), eval_h4(m, t), eval_h5(m, t), eval_h6(m, t), eval_h7(m)};
}

Verdict programme_verdict(std::span<const Verdict> per_model) {
  if (per_model.empty()) return Verdict::non_evaluable;
  if (std::all_of(per_model.begin(), per_model.end(), [](Verdict v) { return v == Verdict::pass; })) return Verdict::pass;
  if (std::all_of(per_model.begin(), per_model.end(), [](Verdict v) { return v == Verdict::non_evaluable; })) {
    return Verdict::non_evaluable;
  }
  return Verdict::fail;
}

json report_json(const Report& r) {
  json models = json::array();
  std::map<std::string, std::vector<Verdict>> by_id;
  for (const auto& m : r.models) {
    json doms = json::array();
    for (const auto& d : m.domains) doms.push_back(domain_json(d));
    json hyp = json::object();
    for (const auto& h : evaluate_hypotheses(m, r.thresholds)) {
      hyp[h.id] = {{"verdict", to_string(h.verdict)}, {"detail", h.detail}};
      by_id[h.id].push_back(h.verdict);
    }
    json mj = {{"model", m.model}, {"domains", doms}, {"hypotheses", hyp}, {"controls", m.controls}};
    if (m.causal) {
      json c = {{"analysis", causal::to_json(m.causal->analysis)}};
      c["direction"] = m.causal->direction ? causal::to_json(*m.causal->direction) : json(nullptr);
      c["h7"] = m.causal->h7 ? causal::to_json(*m.causal->h7) : json(nullptr);
      mj["causal"] = c;
    } else {
      mj["causal"] = nullptr;
    }
    if (m.corpus) {
      json c = {{"histogram", corpus::to_json(m.corpus->histogram)}};
      c["fit"] = m.corpus->fit ? corpus::to_json(*m.corpus->fit) : json(nullptr);
      mj["corpus"] = c;
    } else {
      mj["corpus"] = nullptr;
    }
    models.push_back(std::move(mj));
  }
  json programme = json::object();
  for (const auto& [id, verdicts] : by_id) programme[id] = to_string(programme_verdict(verdicts));
  const auto& t = r.thresholds;
  json thresholds = {{"h1_layers", t.h1_layers},         {"h1_domain_fraction", t.h1_domain_fraction},
                     {"primary_alpha", t.primary_alpha}, {"secondary_alpha", t.secondary_alpha},
                     {"wf_range", {t.wf_lo, t.wf_hi}},   {"h3_layers", t.h3_layers},
                     {"trend_metric", geometry::to_string(t.trend_metric)}};
  thresholds["first_layer"] = t.first_layer ? json(*t.first_layer) : json(nullptr);
  thresholds["last_layer"] = t.last_layer ? json(*t.last_layer) : json(nullptr);
  return {{"schema", "weber.report/1"},
          {"h6_model", "logit(correct) ~ z(distance) + z(ln ratio) + z(distance):z(ln ratio) + position"},
          {"thresholds", thresholds},
          {"settings", r.settings},
          {"models", models},
          {"programme", programme}};
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + p.string());
}

}  // namespace

void emit_report(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_text(dir / "report.json", report_json(r).dump(2) + "\n");

  std::string rsa = "model,domain,metric,layer,linear_rho,weber_rho,stevens_rho,weber_p,stevens_beta,winner,h1_pass\n";
  std::string acc = "model,domain,ratio,n,correct,accuracy,ci_lo,ci_hi\n";
  std::string prec = "model,domain,layer,lower,upper,midpoint,raw,normalised,excluded\n";
  std::string dose = "model,dose,mag_mean_dp,mag_mean_abs_dp,rand_mean_abs_dp\n";
  std::string hist = "model,value,count\n";
  using geometry::ModelKind;
  for (const auto& m : r.models) {
    for (const auto& d : m.domains) {
      for (const auto& v : d.layers) {
        rsa += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", m.model, d.domain, geometry::to_string(v.metric),
                           v.layer, csv_num(v.rsa_for(ModelKind::linear).rho), csv_num(v.rsa_for(ModelKind::weber).rho),
                           csv_num(v.rsa_for(ModelKind::stevens).rho), csv_num(v.rsa_for(ModelKind::weber).mantel_p),
                           csv_num(v.fit(ModelKind::stevens).beta), geometry::to_string(v.winner), v.h1_pass);
      }
      if (d.behaviour) {
        for (const auto& row : d.behaviour->accuracy.by_ratio) {
          acc += fmt::format("{},{},{},{},{},{},{},{}\n", m.model, d.domain, csv_num(row.ratio), row.n, row.correct,
                             csv_num(row.accuracy), csv_num(row.ci.lo), csv_num(row.ci.hi));
        }
      }
      for (const auto& c : d.precision) {
        for (const auto& p : c.points) {
          prec += fmt::format("{},{},{},{},{},{},{},{},{}\n", m.model, d.domain, c.layer, csv_num(p.lower),
                              csv_num(p.upper), csv_num(p.midpoint), p.excluded ? "" : csv_num(p.raw),
                              p.excluded ? "" : csv_num(p.normalised), p.excluded);
        }
      }
    }
    if (m.causal) {
      for (const auto& row : m.causal->analysis.dose_response) {
        dose += fmt::format("{},{},{},{},{}\n", m.model, csv_num(row.dose), csv_num(row.mag_mean_dp),
                            csv_num(row.mag_mean_abs_dp), csv_num(row.rand_mean_abs_dp));
      }
    }
    if (m.corpus) {
      for (int n = 1; n <= corpus::kMaxValue; ++n) hist += fmt::format("{},{},{}\n", m.model, n, m.corpus->histogram.counts[n]);
    }
  }
  write_text(dir / "rsa_by_layer.csv", rsa);
  write_text(dir / "accuracy_by_ratio.csv", acc);
  write_text(dir / "precision_curves.csv", prec);
  write_text(dir / "dose_response.csv", dose);
  write_text(dir / "corpus_histogram.csv", hist);
}

namespace {

Thresholds thresholds_from(const Config& cfg) {
  Thresholds t;
  t.h1_layers = static_cast<std::size_t>(cfg.get_int("thresholds.h1_layers", static_cast<long>(t.h1_layers)));
  if (cfg.has("thresholds.first_layer")) t.first_layer = static_cast<std::size_t>(cfg.get_int("thresholds.first_layer", 0));
  if (cfg.has("thresholds.last_layer")) t.last_layer = static_cast<std::size_t>(cfg.get_int("thresholds.last_layer", 0));
  t.h1_domain_fraction = cfg.get_double("thresholds.h1_domain_fraction", t.h1_domain_fraction);
  t.primary_alpha = cfg.get_double("thresholds.primary_alpha", t.primary_alpha);
  t.secondary_alpha = cfg.get_double("thresholds.secondary_alpha", t.secondary_alpha);
  t.wf_lo = cfg.get_double("thresholds.wf_lo", t.wf_lo);
  t.wf_hi = cfg.get_double("thresholds.wf_hi", t.wf_hi);
  t.h3_layers = static_cast<std::size_t>(cfg.get_int("thresholds.h3_layers", static_cast<long>(t.h3_layers)));
  t.trend_metric = geometry::parse_metric(cfg.get("thresholds.trend_metric", "cosine"));
  return t;
}

struct Common {
  std::vector<geometry::Metric> metrics;
  int permutations = 2000;
  int bootstrap = 1000;
  std::uint64_t seed = 42;
};

Common common_from(const Config& cfg) {
  Common c;
  for (const auto& m : cfg.get_list("geometry.metrics", {"cosine", "euclidean"})) c.metrics.push_back(geometry::parse_metric(m));
  if (c.metrics.empty()) throw Error(Errc::invalid_argument, "geometry.metrics is empty");
  c.permutations = static_cast<int>(cfg.get_int("geometry.permutations", 2000));
  c.bootstrap = static_cast<int>(cfg.get_int("behaviour.bootstrap", 1000));
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  return c;
}

ModelResults synthetic_model(const Config& cfg, const Common& common) {
  ModelResults m;
  m.model = cfg.get("synthetic.model", "synthetic");
  synthetic::EmbeddingSpec spec;
  spec.magnitudes = synthetic::numerical_magnitudes();
  spec.dim = static_cast<std::size_t>(cfg.get_int("synthetic.dim", 4096));
  spec.layers = static_cast<std::size_t>(cfg.get_int("synthetic.layers", 16));
  spec.carriers = static_cast<std::size_t>(cfg.get_int("synthetic.carriers", 5));
  spec.geometry = synthetic::parse_geometry(cfg.get("synthetic.geometry", "log"));
  spec.beta = cfg.get_double("synthetic.beta", 0.5);
  spec.noise_sigma = cfg.get_double("synthetic.noise", 0.05);
  spec.noise_model = synthetic::parse_noise_model(cfg.get("synthetic.noise_model", "carrier"));
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("synthetic.embedding_seed", 7));
  const auto emb = synthetic::gen_embeddings(spec);

  DomainResults dom;
  dom.domain = "numerical";
  analyze_geometry_into(dom, emb.acts, common.metrics, common.permutations, common.seed);

  synthetic::ObserverSpec obs;
  obs.wf = cfg.get_double("synthetic.wf", 0.20);
  obs.lapse = cfg.get_double("synthetic.lapse", 0.0);
  obs.mode = synthetic::parse_observer_mode(cfg.get("synthetic.observer", "ratio"));
  obs.seed = common.seed;
  obs.model = m.model;
  const auto pairs = stimulus::build_comparison_pairs(stimulus::Domain::numerical, stimulus::Task::b1_crossformat,
                                                      common.seed);
  TrialSet set;
  set.trials = synthetic::gen_observer_trials(pairs, obs);
  set.n_records = set.trials.size();
  dom.behaviour = summarize_behaviour(set, common.bootstrap, common.seed);
  m.domains.push_back(std::move(dom));

  // Patch oracle at the middle layer, read out along the planted axis.
  const std::size_t layer = spec.layers / 2;
  const auto dir = causal::fit_magnitude_direction(emb.acts, layer);
  std::vector<std::string> ids;
  std::vector<double> base;
  for (std::size_t i = 0; i < spec.magnitudes.size(); ++i) {
    ids.push_back(fmt::format("p{:02d}", i));
    base.push_back(std::log(spec.magnitudes[i]));
  }
  const double centre = stats::mean(base);
  for (auto& b : base) b -= centre;
  const auto plan = causal::build_patch_plan(dir, ids, common.seed);
  std::vector<std::vector<double>> dirs;
  std::vector<std::string> dir_ids;
  for (std::size_t i = 0; i < plan.n_directions(); ++i) {
    const auto v = plan.direction(i);
    dirs.emplace_back(v.begin(), v.end());
    dir_ids.push_back(plan.direction_id(i));
  }
  synthetic::ReadoutSpec readout{2.0 / emb.span, 0.0};
  const auto results =
      synthetic::gen_readout_patch_results(emb.direction, dirs, dir_ids, plan.doses, dir.projection_span, ids, base, readout);
  CausalSummary cs;
  cs.direction = dir;
  cs.analysis = causal::analyze_patch_results(results);
  cs.h7 = causal::evaluate_h7(results);
  m.causal = std::move(cs);

  const auto mentions = static_cast<std::uint64_t>(cfg.get_int("synthetic.mentions", 1000000));
  const auto text = synthetic::gen_powerlaw_corpus(cfg.get_double("synthetic.alpha", 0.773), mentions, common.seed);
  CorpusSummary corp;
  corp.histogram = corpus::extract_integer_counts(text.text);
  try {
    corp.fit = corpus::fit_magnitude_distribution(corp.histogram);
  } catch (const Error&) {
  }
  m.corpus = std::move(corp);

  const auto shuffled = synthetic::with_shuffled_slots(emb.acts, common.seed);
  const auto shuffle = controls::shuffled_magnitude_check(emb.acts, shuffled, layer);
  const auto cents = compute_centroids(emb.acts);
  const auto rdm = geometry::compute_rdm(cents, layer, geometry::Metric::cosine);
  std::vector<std::size_t> subset;
  for (std::size_t i = 0; i < rdm.magnitudes.size(); ++i)
    if (rdm.magnitudes[i] <= 100.0) subset.push_back(i);
  m.controls = {{"layer", layer}, {"shuffled", controls::to_json(shuffle)}};
  if (subset.size() >= 6) m.controls["single_token"] = controls::to_json(controls::single_token_control(rdm, subset));
  return m;
}

ModelResults file_model(const Config& cfg, const Common& common, const std::string& name) {
  ModelResults m;
  m.model = name;
  const std::string p = name + ".";
  for (auto domain : {stimulus::Domain::numerical, stimulus::Domain::temporal, stimulus::Domain::spatial}) {
    const std::string dn(stimulus::to_string(domain));
    const bool has_acts = cfg.has(p + "activations." + dn);
    const bool has_trials = cfg.has(p + "trials." + dn);
    if (!has_acts && !has_trials) continue;
    DomainResults d;
    d.domain = dn;
    if (has_acts) {
      const auto acts = read_activation_file(cfg.path_of(p + "activations." + dn));
      analyze_geometry_into(d, acts, common.metrics, common.permutations, common.seed);
    }
    if (has_trials) d.behaviour = summarize_behaviour(load_trials(cfg.path_of(p + "trials." + dn)), common.bootstrap, common.seed);
    m.domains.push_back(std::move(d));
  }
  if (cfg.has(p + "patch")) {
    const auto results = load_patch_results(cfg.path_of(p + "patch"));
    const int sign = static_cast<int>(cfg.get_int(p + "patch_sign", 1));
    CausalSummary cs;
    std::vector<PatchResult> plain, symbolic;
    for (const auto& r : results) (r.symbolic ? symbolic : plain).push_back(r);
    cs.analysis = causal::analyze_patch_results(plain.empty() ? results : plain, sign);
    if (!symbolic.empty()) {
      std::optional<double> acc;
      if (cfg.has(p + "baseline_accuracy")) acc = cfg.get_double(p + "baseline_accuracy", 0.0);
      cs.h7 = causal::evaluate_h7(symbolic, sign, acc);
    }
    m.causal = std::move(cs);
  }
  if (cfg.has(p + "corpus")) {
    CorpusSummary corp;
    corp.histogram = corpus::extract_from_path(cfg.path_of(p + "corpus"));
    try {
      corp.fit = corpus::fit_magnitude_distribution(corp.histogram);
    } catch (const Error&) {
    }
    m.corpus = std::move(corp);
  }
  if (cfg.has(p + "shuffled.original") && cfg.has(p + "shuffled.activations")) {
    const auto orig = read_activation_file(cfg.path_of(p + "shuffled.original"));
    const auto shuf = read_activation_file(cfg.path_of(p + "shuffled.activations"));
    const auto layer = static_cast<std::size_t>(cfg.get_int(p + "controls_layer", static_cast<long>(orig.n_layers() / 2)));
    m.controls = {{"layer", layer}, {"shuffled", controls::to_json(controls::shuffled_magnitude_check(orig, shuf, layer))}};
  }
  return m;
}

}  // namespace

Report run_all(const Config& cfg) {
  Report r;
  r.thresholds = thresholds_from(cfg);
  const auto common = common_from(cfg);
  json metrics = json::array();
  for (auto m : common.metrics) metrics.push_back(geometry::to_string(m));
  const std::string mode = cfg.get("mode", "synthetic");
  r.settings = {{"mode", mode},
                {"seed", common.seed},
                {"permutations", common.permutations},
                {"bootstrap", common.bootstrap},
                {"metrics", metrics}};
  if (mode == "synthetic") {
    r.models.push_back(synthetic_model(cfg, common));
  } else if (mode == "files") {
    const auto names = cfg.get_list("models", {});
    if (names.empty()) throw Error(Errc::invalid_argument, "files mode needs a 'models' list");
    for (const auto& n : names) r.models.push_back(file_model(cfg, common, n));
  } else {
    throw Error(Errc::invalid_argument, fmt::format("unknown mode '{}'", mode));
  }
  return r;
}

}  // namespace weber::report
