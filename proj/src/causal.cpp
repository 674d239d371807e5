#include "weber/causal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/rng.hpp"
#include "weber/stats.hpp"

namespace weber::causal {

using nlohmann::json;

namespace {

Eigen::MatrixXd layer_matrix(const ActivationSet& acts, std::size_t layer) {
  const auto n = static_cast<Eigen::Index>(acts.n_stimuli());
  const auto d = static_cast<Eigen::Index>(acts.dim());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto r = acts.row(layer, static_cast<std::size_t>(s));
    for (Eigen::Index k = 0; k < d; ++k) x(s, k) = r[static_cast<std::size_t>(k)];
  }
  return x;
}

}  // namespace

MagnitudeDirection fit_magnitude_direction(const ActivationSet& acts, std::size_t layer, std::optional<double> lambda) {
  if (layer >= acts.n_layers()) throw Error(Errc::missing_layer, fmt::format("layer {} out of range", layer));
  std::set<double> distinct;
  for (const auto& e : acts.manifest()) distinct.insert(e.magnitude);
  if (distinct.size() < 2) throw Error(Errc::insufficient_data, "direction fit needs at least two magnitudes");

  Eigen::MatrixXd x = layer_matrix(acts, layer);
  x.rowwise() -= x.colwise().mean();
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index s = 0; s < x.rows(); ++s) y(s) = std::log(acts.manifest()[static_cast<std::size_t>(s)].magnitude);
  y.array() -= y.mean();

  const Eigen::MatrixXd gram = x * x.transpose();
  const double lam = lambda.value_or(1e-2 * gram.trace() / static_cast<double>(acts.dim()));
  if (!(lam > 0.0)) throw Error(Errc::invalid_argument, "ridge lambda must be positive");
  Eigen::MatrixXd sys = gram;
  sys.diagonal().array() += lam;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sys);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-15) {
    throw Error(Errc::singular, "ridge system is singular");
  }
  const Eigen::VectorXd alpha = ldlt.solve(y);
  Eigen::VectorXd w = x.transpose() * alpha;
  const double wn = w.norm();
  if (!(wn > 0.0)) throw Error(Errc::zero_norm, "ridge solution is the zero vector");

  MagnitudeDirection dir;
  dir.layer = layer;
  dir.ridge_lambda = lam;
  const Eigen::VectorXd fitted = x * w;
  const double tss = y.squaredNorm();
  dir.probe_r2 = tss > 0.0 ? 1.0 - (y - fitted).squaredNorm() / tss : 0.0;
  dir.r2_degenerate = acts.dim() >= acts.n_stimuli() && dir.probe_r2 > 0.999;
  w /= wn;

  const CentroidSet cents = compute_centroids(acts);
  std::vector<double> proj(cents.n_magnitudes()), logs(cents.n_magnitudes());
  for (std::size_t m = 0; m < cents.n_magnitudes(); ++m) {
    const auto r = cents.row(layer, m);
    double p = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) p += r[k] * w(static_cast<Eigen::Index>(k));
    proj[m] = p;
    logs[m] = std::log(cents.magnitudes[m]);
  }
  if (stats::pearson(proj, logs) < 0.0) {
    w = -w;
    for (auto& p : proj) p = -p;
  }
  const auto [lo, hi] = std::minmax_element(proj.begin(), proj.end());
  dir.projection_span = *hi - *lo;
  dir.unit_vector.assign(w.data(), w.data() + w.size());
  return dir;
}

PcaValidation pca_validate(const CentroidSet& cents, std::size_t layer, const MagnitudeDirection& dir) {
  if (layer >= cents.n_layers) throw Error(Errc::missing_layer, fmt::format("layer {} out of range", layer));
  const std::size_t n = cents.n_magnitudes();
  if (n < 3) throw Error(Errc::insufficient_data, "PCA validation needs at least three magnitudes");
  if (dir.unit_vector.size() != cents.dim) throw Error(Errc::shape_mismatch, "direction and centroids differ in dim");
  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cents.dim));
  for (std::size_t m = 0; m < n; ++m) {
    const auto r = cents.row(layer, m);
    for (std::size_t k = 0; k < cents.dim; ++k) c(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = r[k];
  }
  c.rowwise() -= c.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c * c.transpose());
  const auto& ev = eig.eigenvalues();
  const double top = ev(ev.size() - 1);
  if (!(top > 1e-300)) throw Error(Errc::rank_deficient, "centroids have no variance; PC1 undefined");
  Eigen::VectorXd axis = c.transpose() * eig.eigenvectors().col(ev.size() - 1);
  axis.normalize();
  const Eigen::VectorXd scores = c * axis;
  std::vector<double> s(scores.data(), scores.data() + scores.size()), logs(n);
  for (std::size_t m = 0; m < n; ++m) logs[m] = std::log(cents.magnitudes[m]);
  PcaValidation v;
  v.pc1_logmag_r = std::abs(stats::pearson(s, logs));
  v.pass = v.pc1_logmag_r > 0.80;
  double dot = 0.0;
  for (std::size_t k = 0; k < cents.dim; ++k) dot += axis(static_cast<Eigen::Index>(k)) * dir.unit_vector[k];
  v.pc1_dir_cos = std::abs(dot);
  v.explained = top / ev.sum();
  return v;
}

std::string PatchPlan::direction_id(std::size_t i) const { return i == 0 ? "mag" : fmt::format("rand_{}", i); }

std::span<const double> PatchPlan::direction(std::size_t i) const {
  if (i >= n_directions()) throw Error(Errc::invalid_argument, "direction index out of range");
  return i == 0 ? std::span<const double>(mag.unit_vector) : std::span<const double>(random[i - 1]);
}

std::vector<double> PatchPlan::offset(std::size_t direction_index, double dose) const {
  const auto v = direction(direction_index);
  std::vector<double> out(v.size());
  const double scale = dose * mag.projection_span;
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = scale * v[k];
  return out;
}

PatchPlan build_patch_plan(const MagnitudeDirection& dir, std::vector<std::string> prompt_ids, std::uint64_t seed,
                           std::size_t n_random) {
  if (dir.unit_vector.empty()) throw Error(Errc::invalid_argument, "direction has no components");
  if (!(dir.projection_span > 0.0)) throw Error(Errc::invalid_argument, "direction has zero projection span");
  PatchPlan plan;
  plan.layer = dir.layer;
  plan.mag = dir;
  plan.prompt_ids = std::move(prompt_ids);
  plan.seed = seed;
  const std::size_t dim = dir.unit_vector.size();
  Rng rng(seed);
  for (std::size_t r = 0; r < n_random; ++r) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    double dot = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      v[k] /= norm;
      dot += v[k] * dir.unit_vector[k];
    }
    plan.max_random_cos = std::max(plan.max_random_cos, std::abs(dot));
    plan.random.push_back(std::move(v));
  }
  plan.near_orthogonal = dim < 512 || plan.max_random_cos < 0.2;
  return plan;
}

WbractBlock plan_to_wbract(const PatchPlan& plan) {
  WbractBlock b;
  const std::size_t dim = plan.mag.unit_vector.size();
  b.layers = 1;
  b.rows = static_cast<std::uint32_t>(plan.n_directions());
  b.dim = static_cast<std::uint32_t>(dim);
  b.tensor.reserve(plan.n_directions() * dim);
  json ids = json::array();
  for (std::size_t i = 0; i < plan.n_directions(); ++i) {
    for (double v : plan.direction(i)) b.tensor.push_back(static_cast<float>(v));
    ids.push_back(plan.direction_id(i));
  }
  b.manifest = {{"schema", "weber.wbract/1"},
                {"kind", "patch_plan"},
                {"layer", plan.layer},
                {"doses", plan.doses},
                {"scale_rule", "dose * projection_span"},
                {"projection_span", plan.mag.projection_span},
                {"ridge_lambda", plan.mag.ridge_lambda},
                {"probe_r2", plan.mag.probe_r2},
                {"prompt_ids", plan.prompt_ids},
                {"seed", plan.seed},
                {"position", plan.position},
                {"directions", ids},
                {"planned_runs", plan.planned_runs()},
                {"max_random_cos", plan.max_random_cos}};
  return b;
}

PatchPlan plan_from_wbract(const WbractBlock& b) {
  const json& m = b.manifest;
  if (!m.is_object() || m.value("kind", "") != "patch_plan") {
    throw Error(Errc::malformed_manifest, "wbract manifest is not a patch plan");
  }
  if (b.layers != 1 || b.rows < 1) throw Error(Errc::shape_mismatch, "patch plan tensor must be 1 x directions x dim");
  PatchPlan p;
  try {
    p.layer = m.at("layer").get<std::size_t>();
    p.doses = m.at("doses").get<std::vector<double>>();
    p.prompt_ids = m.at("prompt_ids").get<std::vector<std::string>>();
    p.seed = m.at("seed").get<std::uint64_t>();
    p.position = m.value("position", std::string("magnitude_token"));
    p.mag.layer = p.layer;
    p.mag.projection_span = m.at("projection_span").get<double>();
    p.mag.ridge_lambda = m.value("ridge_lambda", 0.0);
    p.mag.probe_r2 = m.value("probe_r2", 0.0);
    p.max_random_cos = m.value("max_random_cos", 0.0);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_manifest, std::string("patch plan manifest: ") + e.what());
  }
  for (std::uint32_t r = 0; r < b.rows; ++r) {
    std::vector<double> v(b.tensor.begin() + static_cast<std::ptrdiff_t>(r) * b.dim,
                          b.tensor.begin() + static_cast<std::ptrdiff_t>(r + 1) * b.dim);
    if (r == 0) {
      p.mag.unit_vector = std::move(v);
    } else {
      p.random.push_back(std::move(v));
    }
  }
  p.near_orthogonal = b.dim < 512 || p.max_random_cos < 0.2;
  return p;
}

bool dose_monotonic(std::span<const double> means, int expected_sign) {
  if (means.size() < 2) return true;
  std::vector<double> v(means.begin(), means.end());
  for (auto& x : v) x *= expected_sign;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  int inversions = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) {
      ++inversions;
      worst = std::max(worst, v[i - 1] - v[i]);
    }
  }
  if (inversions == 0) return true;
  return inversions == 1 && worst < 0.1 * range;
}

namespace {

bool is_mag(const PatchResult& r) { return r.direction_id == "mag"; }
bool is_random(const PatchResult& r) { return r.direction_id.rfind("rand", 0) == 0; }

}  // namespace

PatchAnalysis analyze_patch_results(std::span<const PatchResult> results, int expected_sign,
                                    std::optional<double> dose) {
  std::map<double, std::vector<const PatchResult*>> mag, rnd;
  for (const auto& r : results) {
    if (is_mag(r)) mag[r.dose].push_back(&r);
    else if (is_random(r)) rnd[r.dose].push_back(&r);
  }
  if (mag.empty()) throw Error(Errc::empty_input, "no magnitude-direction results");
  if (rnd.empty()) throw Error(Errc::empty_input, "no random-direction results");
  PatchAnalysis a;
  a.dose = dose.value_or(mag.rbegin()->first);
  if (!mag.count(a.dose)) throw Error(Errc::empty_input, fmt::format("no magnitude results at dose {}", a.dose));
  if (!rnd.count(a.dose)) throw Error(Errc::empty_input, fmt::format("no random results at dose {}", a.dose));

  auto mean_abs = [](const std::vector<const PatchResult*>& v) {
    double s = 0.0;
    for (const auto* r : v) s += std::abs(r->delta_p);
    return s / static_cast<double>(v.size());
  };
  std::vector<double> means;
  for (const auto& [d, v] : mag) {
    DoseRow row;
    row.dose = d;
    double s = 0.0;
    for (const auto* r : v) s += r->delta_p;
    row.mag_mean_dp = s / static_cast<double>(v.size());
    row.mag_mean_abs_dp = mean_abs(v);
    row.rand_mean_abs_dp = rnd.count(d) ? mean_abs(rnd[d]) : NAN;
    means.push_back(row.mag_mean_dp);
    a.dose_response.push_back(row);
  }
  a.mag_mean_abs_dp = mean_abs(mag[a.dose]);
  a.rand_mean_abs_dp = mean_abs(rnd[a.dose]);
  a.specificity = a.rand_mean_abs_dp > 0.0 ? a.mag_mean_abs_dp / a.rand_mean_abs_dp : INFINITY;
  a.dose_monotonic = dose_monotonic(means, expected_sign);
  std::size_t shifted = 0;
  for (const auto* r : mag[a.dose])
    if (expected_sign * r->delta_p > 0.0) ++shifted;
  a.shift_fraction = static_cast<double>(shifted) / static_cast<double>(mag[a.dose].size());
  a.sign_correct = a.shift_fraction > 0.5;
  return a;
}

H7Result evaluate_h7(double shift_fraction, std::optional<double> baseline_accuracy) {
  H7Result h;
  h.shift_fraction = shift_fraction;
  h.pass = shift_fraction >= kH7Threshold;
  h.baseline_accuracy = baseline_accuracy;
  h.ceiling = baseline_accuracy && *baseline_accuracy > kCeilingAccuracy;
  return h;
}

H7Result evaluate_h7(std::span<const PatchResult> symbolic_results, int expected_sign,
                     std::optional<double> baseline_accuracy) {
  const bool any_tagged = std::any_of(symbolic_results.begin(), symbolic_results.end(),
                                      [](const PatchResult& r) { return r.symbolic; });
  std::map<double, std::pair<std::size_t, std::size_t>> by_dose;
  for (const auto& r : symbolic_results) {
    if (!is_mag(r) || (any_tagged && !r.symbolic)) continue;
    auto& c = by_dose[r.dose];
    ++c.second;
    if (expected_sign * r.delta_p > 0.0) ++c.first;
  }
  if (by_dose.empty()) throw Error(Errc::empty_input, "no magnitude-direction results on symbolic prompts");
  const auto& top = by_dose.rbegin()->second;
  return evaluate_h7(static_cast<double>(top.first) / static_cast<double>(top.second), baseline_accuracy);
}

json to_json(const MagnitudeDirection& d, bool with_vector) {
  json j = {{"layer", d.layer},
            {"ridge_lambda", d.ridge_lambda},
            {"probe_r2", d.probe_r2},
            {"projection_span", d.projection_span},
            {"r2_degenerate", d.r2_degenerate},
            {"dim", d.unit_vector.size()}};
  if (with_vector) j["unit_vector"] = d.unit_vector;
  return j;
}

json to_json(const PcaValidation& v) {
  return {{"pc1_logmag_r", v.pc1_logmag_r}, {"pc1_dir_cos", v.pc1_dir_cos}, {"explained", v.explained},
          {"pass", v.pass}};
}

json to_json(const PatchAnalysis& a) {
  json rows = json::array();
  for (const auto& r : a.dose_response) {
    json j = {{"dose", r.dose}, {"mag_mean_dp", r.mag_mean_dp}, {"mag_mean_abs_dp", r.mag_mean_abs_dp}};
    j["rand_mean_abs_dp"] = std::isfinite(r.rand_mean_abs_dp) ? json(r.rand_mean_abs_dp) : json(nullptr);
    rows.push_back(std::move(j));
  }
  json j = {{"dose", a.dose},
            {"mag_mean_abs_dp", a.mag_mean_abs_dp},
            {"rand_mean_abs_dp", a.rand_mean_abs_dp},
            {"dose_monotonic", a.dose_monotonic},
            {"sign_correct", a.sign_correct},
            {"shift_fraction", a.shift_fraction},
            {"dose_response", rows}};
  j["specificity"] = std::isfinite(a.specificity) ? json(a.specificity) : json(nullptr);
  return j;
}

json to_json(const H7Result& h) {
  json j = {{"shift_fraction", h.shift_fraction}, {"pass", h.pass}, {"ceiling", h.ceiling}};
  j["baseline_accuracy"] = h.baseline_accuracy ? json(*h.baseline_accuracy) : json(nullptr);
  return j;
}

}  // namespace weber::causal
