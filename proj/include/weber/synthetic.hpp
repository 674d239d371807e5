#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weber/activation.hpp"
#include "weber/records.hpp"
#include "weber/stimulus.hpp"

// Ground-truth generators. Nothing here depends on the analysis modules.
namespace weber::synthetic {

enum class Geometry { log, linear, stevens, planted_direction };

std::string_view to_string(Geometry g);
Geometry parse_geometry(std::string_view s);

// carrier: one noise vector per (layer, carrier), shared by every magnitude
// in that carrier. stimulus: an independent draw for every row.
enum class NoiseModel { carrier, stimulus };

std::string_view to_string(NoiseModel m);
NoiseModel parse_noise_model(std::string_view s);

struct EmbeddingSpec {
  std::vector<double> magnitudes;
  std::size_t dim = 4096;
  std::size_t layers = 16;
  std::size_t carriers = 5;
  Geometry geometry = Geometry::log;
  double beta = 0.5;
  double noise_sigma = 0.05;     // noise norm as a fraction of the signal span
  NoiseModel noise_model = NoiseModel::carrier;
  double nuisance_sigma = 0.10;  // planted_direction only
  std::uint64_t seed = 7;
  // Optional, one per magnitude. Magnitudes may then repeat under different
  // forms; the unit is the form with its leading number stripped.
  std::vector<std::string> surface_forms;
  double unit_offset = 0.0;  // norm of a per-unit offset, as a fraction of span
};

struct SyntheticEmbedding {
  ActivationSet acts;
  std::vector<double> direction;  // unit signal axis
  std::vector<double> offset;     // constant component orthogonal to it
  double span = 0.0;
};

// h = c0 + g(n) u + noise, with g centred over the magnitudes, ||c0|| = 2 span
// and c0 orthogonal to u. Noise is redrawn for every layer.
SyntheticEmbedding gen_embeddings(const EmbeddingSpec& spec);

// The integer probe values 1..1000 used by the numerical domain.
std::vector<double> numerical_magnitudes();

enum class ObserverMode { ratio, absdiff };

std::string_view to_string(ObserverMode m);
ObserverMode parse_observer_mode(std::string_view s);

struct ObserverSpec {
  double wf = 0.20;
  double lapse = 0.0;
  ObserverMode mode = ObserverMode::ratio;
  std::uint64_t seed = 1;
  std::string model = "synthetic_observer";
};

// Probability of a correct response for the observer. In ratio mode
// p = lapse + (1 - 2 lapse) logistic(k ln r) with k = ln 3 / ln(1 + wf).
double observer_p_correct(const ObserverSpec& spec, double ratio);

std::vector<TrialRecord> gen_observer_trials(std::span<const stimulus::ComparisonPair> pairs,
                                             const ObserverSpec& spec);

struct SyntheticCorpus {
  std::string text;
  std::vector<std::uint64_t> tally;  // index 1..1000
};

SyntheticCorpus gen_powerlaw_corpus(double alpha, std::uint64_t n_mentions, std::uint64_t seed);

struct ReadoutSpec {
  double gain = 0.0;    // logit change per unit projection
  double centre = 0.0;  // projection where p = 0.5
};

// Patched-run results for a logistic readout p = logistic(gain (x.u - centre)).
// `base` holds each prompt's projection onto `readout` before patching; a patch
// adds dose * scale * direction.
std::vector<PatchResult> gen_readout_patch_results(std::span<const double> readout,
                                                   std::span<const std::vector<double>> directions,
                                                   std::span<const std::string> direction_ids,
                                                   std::span<const double> doses, double scale,
                                                   std::span<const std::string> prompt_ids,
                                                   std::span<const double> base, const ReadoutSpec& spec,
                                                   bool symbolic = false);

// Copy of `acts` whose slot magnitudes are a per-carrier permutation of the
// magnitudes, as in a shuffled-context stimulus set.
ActivationSet with_shuffled_slots(const ActivationSet& acts, std::uint64_t seed);

}  // namespace weber::synthetic
