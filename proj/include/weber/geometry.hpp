#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weber/activation.hpp"

namespace weber::geometry {

enum class Metric { cosine, euclidean, theoretical };
enum class ModelKind { linear, weber, stevens };

std::string_view to_string(Metric m);
std::string_view to_string(ModelKind k);
Metric parse_metric(std::string_view s);
ModelKind parse_model(std::string_view s);

// Symmetric dissimilarity matrix over ascending magnitudes, stored dense.
struct Rdm {
  std::vector<double> magnitudes;
  Metric metric = Metric::euclidean;
  std::vector<double> d;  // n x n row-major

  std::size_t n() const { return magnitudes.size(); }
  double at(std::size_t i, std::size_t j) const { return d[i * n() + j]; }
  // Entries above the diagonal, row by row: (0,1), (0,2), ..., (n-2,n-1).
  std::vector<double> upper() const;
  std::uint64_t checksum() const;
};

Rdm rdm_from_upper(std::vector<double> magnitudes, std::span<const double> upper, Metric metric);

Rdm compute_rdm(const CentroidSet& cents, std::size_t layer, Metric metric);

// Raw predictor distances (upper triangle) before any standardisation.
std::vector<double> model_distances(std::span<const double> magnitudes, ModelKind kind, double beta = 1.0);

// Theoretical RDM, z-scored over its upper triangle.
Rdm theoretical_rdm(std::span<const double> magnitudes, ModelKind kind, std::optional<double> beta = std::nullopt);

struct StevensGrid {
  double beta_min = 0.01;
  double beta_max = 2.0;
  double step = 0.005;
  double tol = 1e-4;
};

struct GeometricFit {
  ModelKind kind = ModelKind::linear;
  double a = 0.0;
  double b = 0.0;
  double beta = 1.0;
  double r2 = 0.0;
  double rss = 0.0;
  double aic = 0.0;
  int n_params = 2;
  std::uint64_t rdm_checksum = 0;
};

GeometricFit fit_geometry(const Rdm& rdm, ModelKind kind, const StevensGrid& grid = {});

// AIC for a least-squares fit over m residuals with k estimated quantities.
double least_squares_aic(double rss, std::size_t m, int k);

struct AicDelta {
  ModelKind better;
  ModelKind worse;
  double delta = 0.0;
};

struct ModelSelection {
  ModelKind winner = ModelKind::weber;
  std::vector<AicDelta> deltas;
};

ModelSelection select_model(std::span<const GeometricFit> fits);

struct RsaResult {
  double rho = 0.0;
  double mantel_p = 1.0;
  int n_permutations = 0;
  std::uint64_t seed = 0;
  bool exact = false;
};

// Spearman RSA with a one-sided Mantel test. Permutations are drawn in fixed
// blocks from independent streams, so `threads` never changes the answer.
RsaResult rsa_mantel(const Rdm& empirical, const Rdm& theoretical, int n_perm, std::uint64_t seed,
                     unsigned threads = 0);

// Same statistic with p from all n! relabellings (n <= 8).
RsaResult rsa_mantel_exact(const Rdm& empirical, const Rdm& theoretical);

struct LayerVerdict {
  std::size_t layer = 0;
  Metric metric = Metric::euclidean;
  GeometricFit fits[3];  // indexed by ModelKind
  RsaResult rsa[3];
  ModelKind winner = ModelKind::weber;
  bool h1_pass = false;

  const GeometricFit& fit(ModelKind k) const { return fits[static_cast<int>(k)]; }
  const RsaResult& rsa_for(ModelKind k) const { return rsa[static_cast<int>(k)]; }
};

inline constexpr double kPrimaryAlpha = 0.017;

bool h1_layer_pass(double weber_rho, double linear_rho, double weber_p, double weber_aic, double linear_aic);

LayerVerdict analyze_layer(const CentroidSet& cents, std::size_t layer, Metric metric, int n_perm, std::uint64_t seed,
                           unsigned threads = 0);

struct H1Result {
  bool pass = false;
  std::size_t passing = 0;
  std::size_t evaluated = 0;
  std::size_t threshold = 9;
};

// Verdicts for one metric; every layer in [first, last] must be present.
H1Result evaluate_h1(std::span<const LayerVerdict> verdicts, std::size_t first, std::size_t last,
                     std::size_t threshold = 9);

struct NamedPredictor {
  std::string name;
  std::vector<double> values;  // upper triangle
};

struct VariancePartition {
  double r2_full = 0.0;
  std::vector<std::string> names;
  std::vector<double> partial_r2;  // R2_full - R2 without the predictor
  double shared_r2 = 0.0;
  double condition_number = 0.0;
};

VariancePartition variance_partition(const Rdm& empirical, std::span<const NamedPredictor> predictors);

// Predictor of |digit count difference| for integer magnitudes.
std::vector<double> digit_count_distances(std::span<const double> magnitudes);

struct DigitBoundaryEffect {
  double cohens_d = 0.0;
  std::size_t bins_used = 0;
  std::size_t bins_dropped = 0;
  std::size_t crossing_pairs = 0;
  std::size_t same_pairs = 0;
};

DigitBoundaryEffect digit_boundary_effect(const Rdm& rdm, std::size_t n_bins = 10);

struct Periodogram {
  std::vector<double> frequency;
  std::vector<double> power;  // normalised by the sample variance
  double dominant_frequency = 0.0;
  double dominant_period = 0.0;
  double peak_power = 0.0;
};

Periodogram lomb_scargle(std::span<const double> t, std::span<const double> y, double oversample = 5.0);

struct PeriodicityReport {
  bool trigger = false;
  double r2 = 0.0;
  std::vector<double> residual_by_magnitude;
  Periodogram by_value;
  Periodogram by_log_value;
};

inline constexpr double kPeriodicityTrigger = 0.20;

PeriodicityReport residual_periodicity(const GeometricFit& fit, const Rdm& rdm);

nlohmann::json to_json(const Rdm& rdm);
nlohmann::json to_json(const GeometricFit& fit);
nlohmann::json to_json(const RsaResult& r);
nlohmann::json to_json(const LayerVerdict& v);
nlohmann::json to_json(const H1Result& r);
nlohmann::json to_json(const VariancePartition& v);
nlohmann::json to_json(const DigitBoundaryEffect& d);
nlohmann::json to_json(const Periodogram& p);
nlohmann::json to_json(const PeriodicityReport& p);

}  // namespace weber::geometry
