#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "weber/activation.hpp"
#include "weber/behaviour.hpp"
#include "weber/causal.hpp"
#include "weber/controls.hpp"
#include "weber/corpus.hpp"
#include "weber/error.hpp"
#include "weber/geometry.hpp"
#include "weber/hash.hpp"
#include "weber/precision.hpp"
#include "weber/report.hpp"
#include "weber/stimulus.hpp"
#include "weber/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace weber;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << text;
}

void emit(const json& j, const std::string& out) {
  const auto text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<geometry::Metric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<geometry::Metric> out;
  for (const auto& n : names) out.push_back(geometry::parse_metric(n));
  if (out.empty()) throw Error(Errc::invalid_argument, "no metric given");
  return out;
}

std::pair<std::size_t, std::size_t> layer_range(const std::string& spec, std::size_t n_layers) {
  if (spec.empty()) return {0, n_layers - 1};
  const auto colon = spec.find(':');
  try {
    if (colon == std::string::npos) {
      const auto l = std::stoul(spec);
      return {l, l};
    }
    return {std::stoul(spec.substr(0, colon)), std::stoul(spec.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "layer range must look like 3 or 0:15");
  }
}

template <typename F>
json guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

struct GenStimuli {
  std::string domain = "all";
  std::vector<std::string> tasks;
  std::uint64_t seed = 42;
  bool unlabelled = false;
  std::string out = "stimuli";
};

void gen_stimuli(const GenStimuli& o) {
  std::vector<stimulus::Domain> domains;
  if (o.domain == "all") {
    domains = {stimulus::Domain::numerical, stimulus::Domain::temporal, stimulus::Domain::spatial};
  } else {
    domains = {stimulus::parse_domain(o.domain)};
  }
  std::vector<stimulus::Task> tasks;
  for (const auto& t : o.tasks) tasks.push_back(stimulus::parse_task(t));
  if (tasks.empty()) tasks = {stimulus::Task::b1_crossformat};
  json summary = json::array();
  for (auto d : domains) {
    const auto probes = stimulus::build_probe_set(d);
    const auto probe_text = stimulus::probes_jsonl(d, probes);
    const auto probe_path = fs::path(o.out) / fmt::format("{}_probes.jsonl", stimulus::to_string(d));
    write_file(probe_path, probe_text);
    summary.push_back({{"file", probe_path.string()}, {"count", probes.size()},
                       {"fnv1a64", fmt::format("{:016x}", fnv1a64(probe_text))}});
    for (auto t : tasks) {
      if (!stimulus::supports(d, t)) continue;
      const auto pairs = stimulus::build_comparison_pairs(d, t, o.seed);
      const auto text = stimulus::pairs_jsonl(d, t, o.seed, !o.unlabelled, pairs);
      const auto path = fs::path(o.out) / fmt::format("{}_{}_pairs.jsonl", stimulus::to_string(d), stimulus::to_string(t));
      write_file(path, text);
      summary.push_back({{"file", path.string()}, {"count", pairs.size()},
                         {"fnv1a64", fmt::format("{:016x}", fnv1a64(text))}});
    }
  }
  std::cout << summary.dump(2) << "\n";
}

void validate_activations(const std::string& path, const std::string& against, const std::string& out) {
  const auto acts = read_activation_file(path);
  const auto cents = compute_centroids(acts);
  json icc = json::array();
  for (std::size_t l = 0; l < acts.n_layers(); ++l) {
    icc.push_back(guarded([&] {
      const auto r = carrier_icc(acts, l);
      return json{{"layer", l}, {"icc", r.icc}, {"degenerate", r.degenerate}, {"scalar", r.scalar}};
    }));
  }
  json j = {{"file", path},
            {"n_layers", acts.n_layers()},
            {"n_stimuli", acts.n_stimuli()},
            {"dim", acts.dim()},
            {"magnitudes", cents.magnitudes},
            {"carrier_counts", cents.carrier_counts},
            {"carrier_icc", icc},
            {"meta", acts.meta()},
            {"valid", true}};
  if (!against.empty()) {
    const auto other = read_activation_file(against);
    const auto a = tensor_agreement(acts, other);
    j["agreement"] = {{"per_layer_r", a.per_layer_r}, {"worst_layer", a.worst_layer}, {"worst_r", a.worst_r}};
  }
  emit(j, out);
}

struct GeometryOpts {
  std::string path;
  std::vector<std::string> metrics{"cosine", "euclidean"};
  int permutations = 2000;
  std::uint64_t seed = 42;
  std::string layers;
  std::size_t h1_threshold = 9;
  unsigned threads = 0;
  bool extras = false;
  std::string out;
};

void analyze_geometry(const GeometryOpts& o) {
  const auto acts = read_activation_file(o.path);
  const auto cents = compute_centroids(acts);
  const auto [first, last] = layer_range(o.layers, acts.n_layers());
  if (last >= acts.n_layers() || first > last) throw Error(Errc::missing_layer, "layer range outside the file");
  json by_metric = json::object();
  for (auto metric : parse_metrics(o.metrics)) {
    std::vector<geometry::LayerVerdict> verdicts;
    json layers = json::array();
    for (std::size_t l = first; l <= last; ++l) {
      verdicts.push_back(geometry::analyze_layer(cents, l, metric, o.permutations, o.seed, o.threads));
      auto lj = geometry::to_json(verdicts.back());
      if (o.extras) {
        const auto rdm = geometry::compute_rdm(cents, l, metric);
        lj["digit_boundary"] = guarded([&] { return geometry::to_json(geometry::digit_boundary_effect(rdm)); });
        lj["periodicity"] = guarded([&] {
          return geometry::to_json(geometry::residual_periodicity(verdicts.back().fit(geometry::ModelKind::weber), rdm));
        });
        lj["variance_partition"] = guarded([&] {
          const std::vector<geometry::NamedPredictor> preds{
              {"log", geometry::model_distances(rdm.magnitudes, geometry::ModelKind::weber)},
              {"linear", geometry::model_distances(rdm.magnitudes, geometry::ModelKind::linear)},
              {"digit_count", geometry::digit_count_distances(rdm.magnitudes)}};
          return geometry::to_json(geometry::variance_partition(rdm, preds));
        });
      }
      layers.push_back(std::move(lj));
    }
    const auto h1 = geometry::evaluate_h1(verdicts, first, last, o.h1_threshold);
    by_metric[std::string(geometry::to_string(metric))] = {{"layers", layers}, {"h1", geometry::to_json(h1)}};
  }
  emit({{"file", o.path}, {"permutations", o.permutations}, {"seed", o.seed}, {"metrics", by_metric}}, o.out);
}

void analyze_behaviour(const std::string& path, int bootstrap, std::uint64_t seed, const std::string& out) {
  const auto set = load_trials(path);
  const auto s = report::summarize_behaviour(set, bootstrap, seed);
  json j = {{"file", path},
            {"n_records", s.n_records},
            {"n_invalid", set.n_invalid},
            {"exclusion_fraction", s.exclusion_fraction},
            {"accuracy", behaviour::to_json(s.accuracy)},
            {"chance_p", s.chance_p},
            {"entropy", behaviour::to_json(s.entropy)},
            {"errors", s.errors}};
  j["deviance"] = s.deviance ? behaviour::to_json(*s.deviance) : json(nullptr);
  j["psychometric"] = s.fit ? behaviour::to_json(*s.fit) : json(nullptr);
  j["wf_ci"] = s.wf_ci ? behaviour::to_json(*s.wf_ci) : json(nullptr);
  j["distance_ratio"] = s.distance_ratio ? behaviour::to_json(*s.distance_ratio) : json(nullptr);
  j["dprime"] = guarded([&] { return behaviour::to_json(behaviour::dprime_profile(set.trials)); });
  emit(j, out);
}

void analyze_precision(const std::vector<std::string>& paths, std::size_t threshold, const std::string& out) {
  std::vector<std::vector<precision::PrecisionCurve>> domains;
  json files = json::array();
  std::size_t layers = 0;
  for (const auto& p : paths) {
    const auto acts = read_activation_file(p);
    const auto cents = compute_centroids(acts);
    std::vector<precision::PrecisionCurve> curves;
    json cj = json::array();
    for (std::size_t l = 0; l < acts.n_layers(); ++l) {
      curves.push_back(precision::analyze_precision(cents, l));
      cj.push_back(precision::to_json(curves.back()));
    }
    layers = std::max(layers, acts.n_layers());
    files.push_back({{"file", p}, {"curves", cj}});
    domains.push_back(std::move(curves));
  }
  json j = {{"domains", files}};
  j["h3"] = guarded([&] { return precision::to_json(precision::evaluate_h3(domains, layers, threshold)); });
  emit(j, out);
}

void plan_patch(const std::string& path, std::size_t layer, const std::string& prompts_file, std::size_t n_prompts,
                std::size_t n_random, std::uint64_t seed, const std::string& out) {
  const auto acts = read_activation_file(path);
  std::vector<std::string> ids;
  if (!prompts_file.empty()) {
    std::istringstream in(read_file(prompts_file));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) ids.push_back(line);
    }
  } else {
    for (std::size_t i = 0; i < n_prompts; ++i) ids.push_back(fmt::format("prompt_{:04d}", i));
  }
  const auto dir = causal::fit_magnitude_direction(acts, layer);
  const auto cents = compute_centroids(acts);
  const auto check = causal::pca_validate(cents, layer, dir);
  const auto plan = causal::build_patch_plan(dir, ids, seed, n_random);
  write_wbract(out, causal::plan_to_wbract(plan));
  std::cout << json{{"plan", out},
                    {"direction", causal::to_json(dir)},
                    {"pca_validation", causal::to_json(check)},
                    {"planned_runs", plan.planned_runs()},
                    {"max_random_cos", plan.max_random_cos},
                    {"near_orthogonal", plan.near_orthogonal}}
                   .dump(2)
            << "\n";
}

void analyze_patch(const std::string& path, int sign, std::optional<double> baseline, const std::string& out) {
  const auto results = load_patch_results(path);
  std::vector<PatchResult> plain, symbolic;
  for (const auto& r : results) (r.symbolic ? symbolic : plain).push_back(r);
  json j = {{"file", path}, {"n_results", results.size()}};
  j["analysis"] = causal::to_json(causal::analyze_patch_results(plain.empty() ? results : plain, sign));
  j["h7"] = symbolic.empty() ? json(nullptr)
                             : guarded([&] { return causal::to_json(causal::evaluate_h7(symbolic, sign, baseline)); });
  emit(j, out);
}

void corpus_fit(const std::vector<std::string>& paths, const std::string& out) {
  corpus::MagnitudeHistogram h;
  for (const auto& p : paths) h.add(corpus::extract_from_path(p));
  json j = {{"inputs", paths}, {"histogram", corpus::to_json(h)}};
  j["fit"] = guarded([&] { return corpus::to_json(corpus::fit_magnitude_distribution(h)); });
  emit(j, out);
}

struct ControlsOpts {
  std::string original, shuffled, units, frequency, single_token;
  std::size_t layer = 0;
  double max_single = 9.0;
  std::string out;
};

void run_controls(const ControlsOpts& o) {
  json j = json::object();
  j["layer"] = o.layer;
  if (!o.shuffled.empty()) {
    if (o.original.empty()) throw Error(Errc::invalid_argument, "--shuffled needs --original");
    const auto a = read_activation_file(o.original);
    const auto b = read_activation_file(o.shuffled);
    j["shuffled"] = controls::to_json(controls::shuffled_magnitude_check(a, b, o.layer));
  }
  if (!o.single_token.empty()) {
    const auto acts = read_activation_file(o.single_token);
    const auto rdm = geometry::compute_rdm(compute_centroids(acts), o.layer, geometry::Metric::cosine);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < rdm.magnitudes.size(); ++i)
      if (rdm.magnitudes[i] <= o.max_single) subset.push_back(i);
    j["single_token"] = controls::to_json(controls::single_token_control(rdm, subset));
  }
  if (!o.units.empty()) {
    j["unit_boundary"] = controls::to_json(controls::unit_boundary_check(read_activation_file(o.units), o.layer));
  }
  if (!o.frequency.empty()) {
    const auto doc = json::parse(read_file(o.frequency), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::malformed_record, "frequency file is not a JSON object");
    auto read = [&](const char* key) {
      std::vector<controls::LogProb> v;
      if (!doc.contains(key) || !doc[key].is_array()) {
        throw Error(Errc::malformed_record, fmt::format("frequency file lacks array '{}'", key));
      }
      for (const auto& e : doc[key]) {
        try {
          v.push_back({e.at("id").get<std::string>(), e.at("logprob").get<double>()});
        } catch (const json::exception& ex) {
          throw Error(Errc::malformed_record, fmt::format("'{}' entry: {}", key, ex.what()));
        }
      }
      return v;
    };
    const auto numbers = read("numbers");
    const auto nouns = read("nouns");
    j["frequency_match"] = controls::to_json(controls::hungarian_frequency_match(numbers, nouns));
  }
  emit(j, o.out);
}

struct SynthEmbOpts {
  synthetic::EmbeddingSpec spec;
  std::string geometry = "log";
  std::string noise_model = "carrier";
  std::string magnitudes;
  std::string out = "synthetic.wbract";
};

struct SynthObsOpts {
  synthetic::ObserverSpec spec;
  std::string mode = "ratio";
  std::string domain = "numerical";
  std::string task = "B1";
  std::uint64_t pair_seed = 42;
  std::string out = "trials.jsonl";
};

struct SynthCorpusOpts {
  double alpha = 0.773;
  std::uint64_t mentions = 1000000;
  std::uint64_t seed = 1;
  std::string out = "corpus.txt";
  std::string tally;
};

int run(int argc, char** argv) {
  CLI::App app{"weber: magnitude psychophysics analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "weber 0.3.0");

  GenStimuli gs;
  auto* c_gen = app.add_subcommand("gen-stimuli", "Write probe sets and comparison pairs");
  c_gen->add_option("--domain", gs.domain, "numerical, temporal, spatial or all");
  c_gen->add_option("--task", gs.tasks, "B1, B2, B3 or symbolic");
  c_gen->add_option("--seed", gs.seed);
  c_gen->add_flag("--unlabelled", gs.unlabelled);
  c_gen->add_option("--out", gs.out, "output directory");

  std::string va_path, va_against, va_out;
  auto* c_val = app.add_subcommand("validate-activations", "Check a .wbract file and report carrier ICC");
  c_val->add_option("file", va_path)->required();
  c_val->add_option("--against", va_against, "second extraction to compare");
  c_val->add_option("--out", va_out);

  GeometryOpts go;
  auto* c_geo = app.add_subcommand("analyze-geometry", "RDMs, model fits and Mantel RSA per layer");
  c_geo->add_option("file", go.path)->required();
  c_geo->add_option("--metric", go.metrics)->delimiter(',');
  c_geo->add_option("--permutations", go.permutations);
  c_geo->add_option("--seed", go.seed);
  c_geo->add_option("--layers", go.layers, "first:last");
  c_geo->add_option("--h1-threshold", go.h1_threshold);
  c_geo->add_option("--threads", go.threads);
  c_geo->add_flag("--extras", go.extras, "digit boundary, periodicity and variance partition");
  c_geo->add_option("--out", go.out);

  std::string ab_path, ab_out;
  int ab_boot = 1000;
  std::uint64_t ab_seed = 42;
  auto* c_beh = app.add_subcommand("analyze-behaviour", "Accuracy, deviance test, psychometric fit and BCa interval");
  c_beh->add_option("file", ab_path)->required();
  c_beh->add_option("--bootstrap", ab_boot);
  c_beh->add_option("--seed", ab_seed);
  c_beh->add_option("--out", ab_out);

  std::vector<std::string> ap_paths;
  std::size_t ap_threshold = precision::kH3LayerThreshold;
  std::string ap_out;
  auto* c_prec = app.add_subcommand("analyze-precision", "Precision curves; one file per domain");
  c_prec->add_option("files", ap_paths)->required();
  c_prec->add_option("--h3-threshold", ap_threshold);
  c_prec->add_option("--out", ap_out);

  std::string pp_path, pp_prompts, pp_out = "plan.wbract";
  std::size_t pp_layer = 0, pp_n = 200, pp_random = 10;
  std::uint64_t pp_seed = 42;
  auto* c_plan = app.add_subcommand("plan-patch", "Fit the magnitude direction and write a patch plan");
  c_plan->add_option("file", pp_path)->required();
  c_plan->add_option("--layer", pp_layer)->required();
  c_plan->add_option("--prompts", pp_prompts, "file with one prompt id per line");
  c_plan->add_option("--n-prompts", pp_n);
  c_plan->add_option("--random", pp_random);
  c_plan->add_option("--seed", pp_seed);
  c_plan->add_option("--out", pp_out);

  std::string apa_path, apa_out;
  int apa_sign = 1;
  std::optional<double> apa_baseline;
  auto* c_apatch = app.add_subcommand("analyze-patch", "Specificity and dose response of patch results");
  c_apatch->add_option("file", apa_path)->required();
  c_apatch->add_option("--sign", apa_sign);
  c_apatch->add_option("--baseline-accuracy", apa_baseline);
  c_apatch->add_option("--out", apa_out);

  std::vector<std::string> cf_paths;
  std::string cf_out;
  auto* c_corpus = app.add_subcommand("corpus-fit", "Integer frequency histogram and distribution fit");
  c_corpus->add_option("paths", cf_paths)->required();
  c_corpus->add_option("--out", cf_out);

  ControlsOpts co;
  auto* c_ctl = app.add_subcommand("run-controls", "Shuffled, single-token, unit-boundary and frequency controls");
  c_ctl->add_option("--original", co.original);
  c_ctl->add_option("--shuffled", co.shuffled);
  c_ctl->add_option("--single-token", co.single_token);
  c_ctl->add_option("--max-single", co.max_single);
  c_ctl->add_option("--units", co.units);
  c_ctl->add_option("--frequency", co.frequency);
  c_ctl->add_option("--layer", co.layer);
  c_ctl->add_option("--out", co.out);

  auto* c_synth = app.add_subcommand("synth", "Ground-truth generators");
  c_synth->require_subcommand(1);
  SynthEmbOpts se;
  auto* s_emb = c_synth->add_subcommand("embeddings", "Synthetic .wbract");
  s_emb->add_option("--geometry", se.geometry, "log, linear, stevens, planted_direction");
  s_emb->add_option("--beta", se.spec.beta);
  s_emb->add_option("--dim", se.spec.dim);
  s_emb->add_option("--layers", se.spec.layers);
  s_emb->add_option("--carriers", se.spec.carriers);
  s_emb->add_option("--noise", se.spec.noise_sigma);
  s_emb->add_option("--noise-model", se.noise_model, "carrier or stimulus");
  s_emb->add_option("--seed", se.spec.seed);
  s_emb->add_option("--magnitudes", se.magnitudes, "comma list; defaults to the numerical probe values");
  s_emb->add_option("--out", se.out);
  SynthObsOpts so;
  auto* s_obs = c_synth->add_subcommand("observer", "Simulated observer trial log");
  s_obs->add_option("--wf", so.spec.wf);
  s_obs->add_option("--lapse", so.spec.lapse);
  s_obs->add_option("--mode", so.mode, "ratio or absdiff");
  s_obs->add_option("--seed", so.spec.seed);
  s_obs->add_option("--domain", so.domain);
  s_obs->add_option("--task", so.task);
  s_obs->add_option("--pair-seed", so.pair_seed);
  s_obs->add_option("--out", so.out);
  SynthCorpusOpts sc;
  auto* s_cor = c_synth->add_subcommand("corpus", "Power-law number corpus");
  s_cor->add_option("--alpha", sc.alpha);
  s_cor->add_option("--mentions", sc.mentions);
  s_cor->add_option("--seed", sc.seed);
  s_cor->add_option("--out", sc.out);
  s_cor->add_option("--tally", sc.tally, "write the exact tally as JSON");

  std::string ra_config, ra_out;
  auto* c_all = app.add_subcommand("run-all", "Full pipeline from a config file");
  c_all->add_option("--config", ra_config)->required();
  c_all->add_option("--out", ra_out, "overrides out_dir from the config");

  CLI11_PARSE(app, argc, argv);

  if (*c_gen) gen_stimuli(gs);
  if (*c_val) validate_activations(va_path, va_against, va_out);
  if (*c_geo) analyze_geometry(go);
  if (*c_beh) analyze_behaviour(ab_path, ab_boot, ab_seed, ab_out);
  if (*c_prec) analyze_precision(ap_paths, ap_threshold, ap_out);
  if (*c_plan) plan_patch(pp_path, pp_layer, pp_prompts, pp_n, pp_random, pp_seed, pp_out);
  if (*c_apatch) analyze_patch(apa_path, apa_sign, apa_baseline, apa_out);
  if (*c_corpus) corpus_fit(cf_paths, cf_out);
  if (*c_ctl) run_controls(co);
  if (*s_emb) {
    se.spec.geometry = synthetic::parse_geometry(se.geometry);
    se.spec.noise_model = synthetic::parse_noise_model(se.noise_model);
    if (se.magnitudes.empty()) {
      se.spec.magnitudes = synthetic::numerical_magnitudes();
    } else {
      std::stringstream ss(se.magnitudes);
      for (std::string tok; std::getline(ss, tok, ',');) se.spec.magnitudes.push_back(std::stod(tok));
    }
    const auto emb = synthetic::gen_embeddings(se.spec);
    write_activation_file(se.out, emb.acts);
    std::cout << json{{"file", se.out}, {"span", emb.span}, {"n_stimuli", emb.acts.n_stimuli()}}.dump() << "\n";
  }
  if (*s_obs) {
    so.spec.mode = synthetic::parse_observer_mode(so.mode);
    const auto pairs = stimulus::build_comparison_pairs(stimulus::parse_domain(so.domain), stimulus::parse_task(so.task),
                                                        so.pair_seed);
    const auto trials = synthetic::gen_observer_trials(pairs, so.spec);
    write_file(so.out, trials_jsonl(trials));
    std::cout << json{{"file", so.out}, {"n_trials", trials.size()}}.dump() << "\n";
  }
  if (*s_cor) {
    const auto c = synthetic::gen_powerlaw_corpus(sc.alpha, sc.mentions, sc.seed);
    write_file(sc.out, c.text);
    if (!sc.tally.empty()) {
      json t = json::object();
      for (std::size_t n = 1; n < c.tally.size(); ++n)
        if (c.tally[n]) t[std::to_string(n)] = c.tally[n];
      write_file(sc.tally, json{{"alpha", sc.alpha}, {"mentions", sc.mentions}, {"seed", sc.seed}, {"tally", t}}.dump() + "\n");
    }
    std::cout << json{{"file", sc.out}, {"mentions", sc.mentions}}.dump() << "\n";
  }
  if (*c_all) {
    auto cfg = report::Config::load(ra_config);
    const auto rep = report::run_all(cfg);
    const fs::path dir = !ra_out.empty() ? fs::path(ra_out) : cfg.has("out_dir") ? cfg.path_of("out_dir") : fs::path("report");
    report::emit_report(rep, dir);
    const auto j = report::report_json(rep);
    std::cout << json{{"out_dir", dir.string()}, {"programme", j["programme"]}}.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "weber: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "weber: %s\n", e.what());
    return 3;
  }
}
