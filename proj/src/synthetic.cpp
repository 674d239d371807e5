#include "weber/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/rng.hpp"

namespace weber::synthetic {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (!(n2 > 0.0));
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

std::string strip_number(std::string_view form) {
  std::size_t i = 0;
  while (i < form.size() && (std::isdigit(static_cast<unsigned char>(form[i])) || form[i] == '.' || form[i] == ',')) ++i;
  while (i < form.size() && form[i] == ' ') ++i;
  return std::string(form.substr(i));
}

double transform(Geometry g, double n, double beta) {
  switch (g) {
    case Geometry::log:
    case Geometry::planted_direction: return std::log(n);
    case Geometry::linear: return n;
    case Geometry::stevens: return std::pow(n, beta);
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Geometry g) {
  switch (g) {
    case Geometry::log: return "log";
    case Geometry::linear: return "linear";
    case Geometry::stevens: return "stevens";
    case Geometry::planted_direction: return "planted_direction";
  }
  return "?";
}

Geometry parse_geometry(std::string_view s) {
  if (s == "log") return Geometry::log;
  if (s == "linear") return Geometry::linear;
  if (s == "stevens") return Geometry::stevens;
  if (s == "planted_direction" || s == "planted") return Geometry::planted_direction;
  throw Error(Errc::invalid_argument, fmt::format("unknown geometry '{}'", s));
}

std::string_view to_string(NoiseModel m) { return m == NoiseModel::carrier ? "carrier" : "stimulus"; }

NoiseModel parse_noise_model(std::string_view s) {
  if (s == "carrier") return NoiseModel::carrier;
  if (s == "stimulus") return NoiseModel::stimulus;
  throw Error(Errc::invalid_argument, fmt::format("unknown noise model '{}'", s));
}

std::vector<double> numerical_magnitudes() {
  std::vector<double> out;
  for (const auto& v : stimulus::probe_values(stimulus::Domain::numerical)) out.push_back(v.canonical);
  return out;
}

SyntheticEmbedding gen_embeddings(const EmbeddingSpec& spec) {
  const std::size_t n_mag = spec.magnitudes.size();
  const std::size_t dim = spec.dim;
  if (dim == 0) throw Error(Errc::invalid_argument, "dim must be at least 1");
  if (n_mag == 0) throw Error(Errc::empty_input, "no magnitudes");
  if (spec.layers == 0 || spec.carriers == 0) throw Error(Errc::invalid_argument, "layers and carriers must be positive");
  if (!spec.surface_forms.empty() && spec.surface_forms.size() != n_mag) {
    throw Error(Errc::shape_mismatch, "surface_forms must have one entry per magnitude");
  }
  if (spec.geometry == Geometry::stevens && !(spec.beta > 0.0)) {
    throw Error(Errc::invalid_argument, "stevens beta must be positive");
  }
  for (double m : spec.magnitudes) {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(Errc::invalid_argument, fmt::format("magnitude {} is not positive", m));
  }

  std::vector<double> g(n_mag);
  for (std::size_t i = 0; i < n_mag; ++i) g[i] = transform(spec.geometry, spec.magnitudes[i], spec.beta);
  const double centre = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(n_mag);
  for (auto& x : g) x -= centre;
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  double span = *hi - *lo;
  if (!(span > 0.0)) span = 1.0;

  Rng base = Rng::stream(spec.seed, 0);
  const auto direction = random_unit(base, dim);
  std::vector<double> offset(dim, 0.0);
  if (dim > 1) {
    auto c = random_unit(base, dim);
    double dot = 0.0;
    for (std::size_t k = 0; k < dim; ++k) dot += c[k] * direction[k];
    double n2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      c[k] -= dot * direction[k];
      n2 += c[k] * c[k];
    }
    const double scale = 2.0 * span / std::sqrt(n2);
    for (std::size_t k = 0; k < dim; ++k) offset[k] = c[k] * scale;
  }

  std::vector<std::vector<double>> nuisance;
  if (spec.geometry == Geometry::planted_direction) {
    for (std::size_t i = 0; i < n_mag; ++i) {
      auto v = random_unit(base, dim);
      for (auto& x : v) x *= spec.nuisance_sigma * span;
      nuisance.push_back(std::move(v));
    }
  }
  std::vector<std::string> forms(n_mag);
  std::map<std::string, std::vector<double>> unit_offsets;
  for (std::size_t i = 0; i < n_mag; ++i) {
    forms[i] = spec.surface_forms.empty() ? fmt::format("{:g}", spec.magnitudes[i]) : spec.surface_forms[i];
    if (spec.unit_offset > 0.0) {
      const auto unit = strip_number(forms[i]);
      if (!unit_offsets.contains(unit)) {
        auto v = random_unit(base, dim);
        for (auto& x : v) x *= spec.unit_offset * span;
        unit_offsets.emplace(unit, std::move(v));
      }
    }
  }

  // Clean per-entry vectors shared by every layer and carrier.
  std::vector<double> clean(n_mag * dim);
  for (std::size_t i = 0; i < n_mag; ++i) {
    double* row = clean.data() + i * dim;
    for (std::size_t k = 0; k < dim; ++k) row[k] = offset[k] + g[i] * direction[k];
    if (!nuisance.empty()) {
      for (std::size_t k = 0; k < dim; ++k) row[k] += nuisance[i][k];
    }
    if (spec.unit_offset > 0.0) {
      const auto& v = unit_offsets.at(strip_number(forms[i]));
      for (std::size_t k = 0; k < dim; ++k) row[k] += v[k];
    }
  }

  const std::size_t n_stim = n_mag * spec.carriers;
  std::vector<ManifestEntry> manifest;
  manifest.reserve(n_stim);
  for (std::size_t i = 0; i < n_mag; ++i) {
    for (std::size_t c = 0; c < spec.carriers; ++c) {
      ManifestEntry e;
      e.stimulus_id = fmt::format("syn_{:03d}_c{}", i, c);
      e.magnitude = spec.magnitudes[i];
      e.carrier_index = static_cast<int>(c);
      e.token_position = static_cast<int>(4 + c);
      e.surface_form = forms[i];
      manifest.push_back(std::move(e));
    }
  }

  const double noise_sd = spec.noise_sigma * span / std::sqrt(static_cast<double>(dim));
  std::vector<float> tensor(spec.layers * n_stim * dim);
  std::vector<double> carrier_noise(spec.carriers * dim, 0.0);
  for (std::size_t l = 0; l < spec.layers; ++l) {
    Rng rng = Rng::stream(spec.seed, 1 + l);
    if (spec.noise_model == NoiseModel::carrier && noise_sd > 0.0) {
      for (auto& x : carrier_noise) x = noise_sd * rng.normal();
    }
    for (std::size_t s = 0; s < n_stim; ++s) {
      const double* row = clean.data() + (s / spec.carriers) * dim;
      const double* shared = carrier_noise.data() + (s % spec.carriers) * dim;
      float* dst = tensor.data() + (l * n_stim + s) * dim;
      for (std::size_t k = 0; k < dim; ++k) {
        double noise = shared[k];
        if (spec.noise_model == NoiseModel::stimulus && noise_sd > 0.0) noise = noise_sd * rng.normal();
        dst[k] = static_cast<float>(row[k] + noise);
      }
    }
  }

  nlohmann::json meta = {{"generator", "synthetic"},
                         {"geometry", to_string(spec.geometry)},
                         {"noise_sigma", spec.noise_sigma},
                         {"noise_model", to_string(spec.noise_model)},
                         {"seed", spec.seed},
                         {"span", span}};
  if (spec.geometry == Geometry::stevens) meta["beta"] = spec.beta;
  return {ActivationSet(spec.layers, n_stim, dim, std::move(tensor), std::move(manifest), std::move(meta)), direction,
          offset, span};
}

ActivationSet with_shuffled_slots(const ActivationSet& acts, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_carrier;
  for (std::size_t s = 0; s < acts.n_stimuli(); ++s) by_carrier[acts.manifest()[s].carrier_index].push_back(s);
  auto manifest = acts.manifest();
  Rng rng(seed);
  for (auto& [carrier, idx] : by_carrier) {
    std::vector<double> mags;
    for (auto s : idx) mags.push_back(manifest[s].magnitude);
    rng.shuffle(std::span<double>(mags));
    for (std::size_t i = 0; i < idx.size(); ++i) manifest[idx[i]].slot_magnitude = mags[i];
  }
  auto meta = acts.meta();
  meta["shuffled_slots_seed"] = seed;
  const auto t = acts.tensor();
  return ActivationSet(acts.n_layers(), acts.n_stimuli(), acts.dim(), std::vector<float>(t.begin(), t.end()),
                       std::move(manifest), std::move(meta));
}

std::string_view to_string(ObserverMode m) { return m == ObserverMode::ratio ? "ratio" : "absdiff"; }

ObserverMode parse_observer_mode(std::string_view s) {
  if (s == "ratio") return ObserverMode::ratio;
  if (s == "absdiff") return ObserverMode::absdiff;
  throw Error(Errc::invalid_argument, fmt::format("unknown observer mode '{}'", s));
}

double observer_p_correct(const ObserverSpec& spec, double ratio) {
  if (!(spec.wf > 0.0)) throw Error(Errc::invalid_argument, "wf must be positive");
  const double k = std::log(3.0) / std::log1p(spec.wf);
  const double lapse = std::clamp(spec.lapse, 0.0, 0.5);
  return lapse + (1.0 - 2.0 * lapse) * logistic(k * std::log(ratio));
}

std::vector<TrialRecord> gen_observer_trials(std::span<const stimulus::ComparisonPair> pairs,
                                             const ObserverSpec& spec) {
  if (!(spec.wf > 0.0)) throw Error(Errc::invalid_argument, "wf must be positive");
  const double lapse = std::clamp(spec.lapse, 0.0, 0.5);
  double ref = 1.0;
  if (spec.mode == ObserverMode::absdiff && !pairs.empty()) {
    double acc = 0.0;
    for (const auto& p : pairs) acc += std::log(p.small.canonical);
    ref = std::exp(acc / static_cast<double>(pairs.size()));
  }
  Rng rng(spec.seed);
  std::vector<TrialRecord> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double small = p.small.canonical;
    const double large = p.large.canonical;
    double pc = 0.5;
    if (spec.mode == ObserverMode::ratio) {
      pc = observer_p_correct(spec, large / small);
    } else {
      pc = lapse + (1.0 - 2.0 * lapse) * logistic(std::log(3.0) * (large - small) / (spec.wf * ref));
    }
    TrialRecord t;
    t.pair_id = p.pair_id;
    t.baseline = p.baseline_nominal;
    t.ratio = p.ratio_nominal;
    t.large_position = p.large_position;
    const bool at_a = p.large_position == stimulus::Position::A;
    t.p_a = at_a ? pc : 1.0 - pc;
    t.p_b = 1.0 - t.p_a;
    t.chosen = rng.bernoulli(t.p_a) ? Choice::A : Choice::B;
    t.correct = (t.chosen == Choice::A) == at_a;
    t.entropy_nats = 0.0;
    for (double q : {t.p_a, t.p_b}) {
      if (q > 0.0) t.entropy_nats -= q * std::log(q);
    }
    t.task = std::string(stimulus::to_string(p.task));
    t.model = spec.model;
    out.push_back(std::move(t));
  }
  return out;
}

SyntheticCorpus gen_powerlaw_corpus(double alpha, std::uint64_t n_mentions, std::uint64_t seed) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(Errc::invalid_argument, "alpha must be non-negative");
  constexpr int kMax = 1000;
  std::array<double, kMax> cdf{};
  double acc = 0.0;
  for (int n = 1; n <= kMax; ++n) {
    acc += std::pow(static_cast<double>(n), -alpha);
    cdf[n - 1] = acc;
  }
  for (auto& c : cdf) c /= acc;
  cdf[kMax - 1] = 1.0;

  static constexpr std::array<std::string_view, 6> kTemplates{
      "The crate held {} apples. ",       "She counted {} birds on the wire. ",
      "About {} people came to the fair. ", "He walked {} steps before noon. ",
      "There were {} pages in the report. ", "They planted {} trees by the river. "};
  static constexpr std::array<std::string_view, 3> kFiller{
      "Nothing else happened that day. ", "The weather stayed mild. ", "Everyone went home early. "};

  SyntheticCorpus out;
  out.tally.assign(kMax + 1, 0);
  out.text.reserve(static_cast<std::size_t>(n_mentions) * 36);
  Rng rng(seed);
  for (std::uint64_t i = 0; i < n_mentions; ++i) {
    const double u = rng.uniform();
    const int n = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) + 1;
    ++out.tally[static_cast<std::size_t>(std::min(n, kMax))];
    out.text += fmt::format(fmt::runtime(kTemplates[rng.below(kTemplates.size())]), std::min(n, kMax));
    if (rng.below(4) == 0) out.text += kFiller[rng.below(kFiller.size())];
    if (i % 20 == 19) out.text += '\n';
  }
  return out;
}

std::vector<PatchResult> gen_readout_patch_results(std::span<const double> readout,
                                                   std::span<const std::vector<double>> directions,
                                                   std::span<const std::string> direction_ids,
                                                   std::span<const double> doses, double scale,
                                                   std::span<const std::string> prompt_ids,
                                                   std::span<const double> base, const ReadoutSpec& spec,
                                                   bool symbolic) {
  if (directions.size() != direction_ids.size()) throw Error(Errc::shape_mismatch, "one id per direction");
  if (prompt_ids.size() != base.size()) throw Error(Errc::shape_mismatch, "one base projection per prompt");
  std::vector<double> along(directions.size());
  for (std::size_t j = 0; j < directions.size(); ++j) {
    if (directions[j].size() != readout.size()) throw Error(Errc::shape_mismatch, "direction length differs from readout");
    along[j] = std::inner_product(readout.begin(), readout.end(), directions[j].begin(), 0.0);
  }
  std::vector<PatchResult> out;
  out.reserve(prompt_ids.size() * directions.size() * doses.size());
  for (std::size_t i = 0; i < prompt_ids.size(); ++i) {
    const double p0 = logistic(spec.gain * (base[i] - spec.centre));
    for (std::size_t j = 0; j < directions.size(); ++j) {
      for (double dose : doses) {
        PatchResult r;
        r.prompt_id = prompt_ids[i];
        r.direction_id = direction_ids[j];
        r.dose = dose;
        r.p_base = p0;
        r.p_patched = logistic(spec.gain * (base[i] + dose * scale * along[j] - spec.centre));
        r.delta_p = r.p_patched - r.p_base;
        r.symbolic = symbolic;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace weber::synthetic
