#include "weber/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/optimize.hpp"
#include "weber/rng.hpp"
#include "weber/stats.hpp"

namespace weber::geometry {

using nlohmann::json;

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::cosine: return "cosine";
    case Metric::euclidean: return "euclidean";
    case Metric::theoretical: return "theoretical";
  }
  return "?";
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return "linear";
    case ModelKind::weber: return "weber";
    case ModelKind::stevens: return "stevens";
  }
  return "?";
}

Metric parse_metric(std::string_view s) {
  if (s == "cosine") return Metric::cosine;
  if (s == "euclidean") return Metric::euclidean;
  if (s == "theoretical") return Metric::theoretical;
  throw Error(Errc::invalid_argument, fmt::format("unknown metric '{}'", s));
}

ModelKind parse_model(std::string_view s) {
  if (s == "linear") return ModelKind::linear;
  if (s == "weber") return ModelKind::weber;
  if (s == "stevens") return ModelKind::stevens;
  throw Error(Errc::invalid_argument, fmt::format("unknown model '{}'", s));
}

std::vector<double> Rdm::upper() const {
  const std::size_t m = n();
  std::vector<double> out;
  out.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) out.push_back(at(i, j));
  return out;
}

std::uint64_t Rdm::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::vector<double>& v) {
    for (double x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, 8);
      for (int k = 0; k < 8; ++k) {
        h ^= (bits >> (8 * k)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  };
  mix(magnitudes);
  mix(d);
  return h;
}

Rdm rdm_from_upper(std::vector<double> magnitudes, std::span<const double> upper, Metric metric) {
  const std::size_t n = magnitudes.size();
  if (upper.size() != n * (n - 1) / 2) throw Error(Errc::shape_mismatch, "upper triangle has the wrong length");
  Rdm r;
  r.magnitudes = std::move(magnitudes);
  r.metric = metric;
  r.d.assign(n * n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      r.d[i * n + j] = upper[k];
      r.d[j * n + i] = upper[k];
    }
  }
  return r;
}

Rdm compute_rdm(const CentroidSet& cents, std::size_t layer, Metric metric) {
  if (layer >= cents.n_layers) throw Error(Errc::missing_layer, fmt::format("layer {} out of range", layer));
  if (metric == Metric::theoretical) throw Error(Errc::invalid_argument, "empirical RDMs use cosine or euclidean");
  const std::size_t n = cents.n_magnitudes();
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : cents.row(layer, i)) norms[i] += v * v;
    norms[i] = std::sqrt(norms[i]);
    if (metric == Metric::cosine && norms[i] == 0.0) {
      throw Error(Errc::zero_norm, fmt::format("centroid for magnitude {} is the zero vector", cents.magnitudes[i]));
    }
  }
  Rdm r;
  r.magnitudes = cents.magnitudes;
  r.metric = metric;
  r.d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = cents.row(layer, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = cents.row(layer, j);
      double v = 0.0;
      if (metric == Metric::euclidean) {
        for (std::size_t k = 0; k < a.size(); ++k) v += (a[k] - b[k]) * (a[k] - b[k]);
        v = std::sqrt(v);
      } else {
        for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * b[k];
        v = std::max(0.0, 1.0 - v / (norms[i] * norms[j]));
      }
      r.d[i * n + j] = v;
      r.d[j * n + i] = v;
    }
  }
  return r;
}

std::vector<double> model_distances(std::span<const double> magnitudes, ModelKind kind, double beta) {
  std::vector<double> t(magnitudes.size());
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    const double m = magnitudes[i];
    if (!(m > 0.0)) throw Error(Errc::invalid_argument, fmt::format("magnitude {} is not positive", m));
    switch (kind) {
      case ModelKind::linear: t[i] = m; break;
      case ModelKind::weber: t[i] = std::log(m); break;
      case ModelKind::stevens: t[i] = std::pow(m, beta); break;
    }
  }
  std::vector<double> out;
  out.reserve(t.size() * (t.size() - 1) / 2);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) out.push_back(std::abs(t[i] - t[j]));
  return out;
}

Rdm theoretical_rdm(std::span<const double> magnitudes, ModelKind kind, std::optional<double> beta) {
  if (kind == ModelKind::stevens && !beta) throw Error(Errc::invalid_argument, "stevens RDM needs beta");
  if (kind != ModelKind::stevens && beta) throw Error(Errc::invalid_argument, "beta only applies to stevens");
  auto u = model_distances(magnitudes, kind, beta.value_or(1.0));
  const double m = stats::mean(u);
  const double sd = stats::stddev(u);
  for (auto& v : u) v = sd > 0.0 ? (v - m) / sd : v - m;
  return rdm_from_upper(std::vector<double>(magnitudes.begin(), magnitudes.end()), u, Metric::theoretical);
}

double least_squares_aic(double rss, std::size_t m, int k) {
  const double md = static_cast<double>(m);
  return md * std::log(std::max(rss / md, 1e-300)) + 2.0 * k;
}

GeometricFit fit_geometry(const Rdm& rdm, ModelKind kind, const StevensGrid& grid) {
  if (rdm.n() < 3) throw Error(Errc::insufficient_data, "fit needs at least three magnitudes");
  const auto y = rdm.upper();
  const std::size_t m = y.size();
  GeometricFit fit;
  fit.kind = kind;
  fit.rdm_checksum = rdm.checksum();
  auto at_beta = [&](double beta) { return stats::fit_line(model_distances(rdm.magnitudes, kind, beta), y); };

  stats::LineFit line;
  if (kind == ModelKind::stevens) {
    fit.n_params = 3;
    const int steps = static_cast<int>(std::lround((grid.beta_max - grid.beta_min) / grid.step));
    double best_beta = grid.beta_min;
    double best_rss = INFINITY;
    for (int s = 0; s <= steps; ++s) {
      const double beta = grid.beta_min + s * grid.step;
      const double rss = at_beta(beta).rss;
      if (rss < best_rss) {
        best_rss = rss;
        best_beta = beta;
      }
    }
    const double lo = std::max(grid.beta_min, best_beta - grid.step);
    const double hi = std::min(grid.beta_max, best_beta + grid.step);
    const double refined = optimize::golden_section([&](double b) { return at_beta(b).rss; }, lo, hi, grid.tol);
    fit.beta = at_beta(refined).rss <= best_rss ? refined : best_beta;
    line = at_beta(fit.beta);
  } else {
    line = at_beta(1.0);
  }
  if (!(line.tss > 0.0)) throw Error(Errc::zero_variance, "RDM has zero variance; nothing to fit");
  fit.a = line.intercept;
  fit.b = line.slope;
  fit.rss = std::max(0.0, line.rss);
  fit.r2 = 1.0 - fit.rss / line.tss;
  fit.aic = least_squares_aic(fit.rss, m, fit.n_params + 1);
  return fit;
}

ModelSelection select_model(std::span<const GeometricFit> fits) {
  if (fits.size() < 2) throw Error(Errc::insufficient_data, "model selection needs at least two fits");
  for (const auto& f : fits) {
    if (f.rdm_checksum != fits[0].rdm_checksum) {
      throw Error(Errc::checksum_mismatch, "fits were computed on different RDMs");
    }
  }
  auto better = [](const GeometricFit& x, const GeometricFit& y) {
    const double tol = 1e-9 * std::max({1.0, std::abs(x.aic), std::abs(y.aic)});
    if (std::abs(x.aic - y.aic) <= tol) return x.n_params < y.n_params;
    return x.aic < y.aic;
  };
  ModelSelection sel;
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i)
    if (better(fits[i], fits[best])) best = i;
  sel.winner = fits[best].kind;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    for (std::size_t j = i + 1; j < fits.size(); ++j) {
      const bool i_first = better(fits[i], fits[j]) || !better(fits[j], fits[i]);
      const auto& w = i_first ? fits[i] : fits[j];
      const auto& l = i_first ? fits[j] : fits[i];
      sel.deltas.push_back({w.kind, l.kind, l.aic - w.aic});
    }
  }
  return sel;
}

namespace {

// Rank-space pieces shared by the observed and permuted statistics.
struct MantelFrame {
  std::size_t n = 0;
  std::vector<double> e;  // centred empirical ranks, upper triangle
  std::vector<double> t;  // centred theoretical ranks, dense n x n
  double scale = 0.0;

  double rho(std::span<const std::size_t> perm) const {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = t.data() + perm[i] * n;
      for (std::size_t j = i + 1; j < n; ++j, ++k) s += e[k] * row[perm[j]];
    }
    return s / scale;
  }
};

MantelFrame mantel_frame(const Rdm& empirical, const Rdm& theoretical) {
  if (empirical.n() != theoretical.n()) {
    throw Error(Errc::shape_mismatch,
                fmt::format("RDM sizes differ ({} vs {})", empirical.n(), theoretical.n()));
  }
  if (empirical.n() < 3) throw Error(Errc::insufficient_data, "RSA needs at least three magnitudes");
  MantelFrame f;
  f.n = empirical.n();
  f.e = stats::ranks(empirical.upper());
  auto tr = stats::ranks(theoretical.upper());
  const double me = stats::mean(f.e);
  const double mt = stats::mean(tr);
  double se = 0.0, st = 0.0;
  for (auto& v : f.e) {
    v -= me;
    se += v * v;
  }
  for (auto& v : tr) {
    v -= mt;
    st += v * v;
  }
  f.scale = std::sqrt(se * st);
  f.t.assign(f.n * f.n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t j = i + 1; j < f.n; ++j, ++k) {
      f.t[i * f.n + j] = tr[k];
      f.t[j * f.n + i] = tr[k];
    }
  }
  return f;
}

constexpr int kMantelBlock = 256;
constexpr double kTieSlack = 1e-12;

}  // namespace

RsaResult rsa_mantel(const Rdm& empirical, const Rdm& theoretical, int n_perm, std::uint64_t seed,
                     unsigned threads) {
  if (n_perm < 100) throw Error(Errc::invalid_argument, "Mantel test needs at least 100 permutations");
  const MantelFrame f = mantel_frame(empirical, theoretical);
  RsaResult r;
  r.n_permutations = n_perm;
  r.seed = seed;
  if (!(f.scale > 0.0)) {
    r.rho = 0.0;
    r.mantel_p = 1.0;
    return r;
  }
  std::vector<std::size_t> identity(f.n);
  std::iota(identity.begin(), identity.end(), 0);
  r.rho = f.rho(identity);

  const int n_blocks = (n_perm + kMantelBlock - 1) / kMantelBlock;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_blocks));
  std::vector<long> hits(n_blocks, 0);
  auto work = [&](unsigned w) {
    std::vector<std::size_t> perm(f.n);
    for (int b = static_cast<int>(w); b < n_blocks; b += static_cast<int>(threads)) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(b));
      std::iota(perm.begin(), perm.end(), 0);
      const int count = std::min(kMantelBlock, n_perm - b * kMantelBlock);
      long h = 0;
      for (int p = 0; p < count; ++p) {
        rng.shuffle(std::span<std::size_t>(perm));
        if (f.rho(perm) >= r.rho - kTieSlack) ++h;
      }
      hits[b] = h;
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  const long total = std::accumulate(hits.begin(), hits.end(), 0L);
  r.mantel_p = static_cast<double>(total + 1) / static_cast<double>(n_perm + 1);
  return r;
}

RsaResult rsa_mantel_exact(const Rdm& empirical, const Rdm& theoretical) {
  if (empirical.n() > 8) throw Error(Errc::invalid_argument, "exact Mantel enumeration is limited to n <= 8");
  const MantelFrame f = mantel_frame(empirical, theoretical);
  RsaResult r;
  r.exact = true;
  std::vector<std::size_t> perm(f.n);
  std::iota(perm.begin(), perm.end(), 0);
  if (!(f.scale > 0.0)) {
    r.mantel_p = 1.0;
    return r;
  }
  r.rho = f.rho(perm);
  long hits = 0, total = 0;
  do {
    ++total;
    if (f.rho(perm) >= r.rho - kTieSlack) ++hits;
  } while (std::next_permutation(perm.begin(), perm.end()));
  r.n_permutations = static_cast<int>(total);
  r.mantel_p = static_cast<double>(hits) / static_cast<double>(total);
  return r;
}

bool h1_layer_pass(double weber_rho, double linear_rho, double weber_p, double weber_aic, double linear_aic) {
  return weber_rho > linear_rho && weber_p < kPrimaryAlpha && weber_aic < linear_aic;
}

LayerVerdict analyze_layer(const CentroidSet& cents, std::size_t layer, Metric metric, int n_perm, std::uint64_t seed,
                           unsigned threads) {
  const Rdm rdm = compute_rdm(cents, layer, metric);
  LayerVerdict v;
  v.layer = layer;
  v.metric = metric;
  for (auto kind : {ModelKind::linear, ModelKind::weber, ModelKind::stevens}) {
    const int k = static_cast<int>(kind);
    v.fits[k] = fit_geometry(rdm, kind);
    const auto theo = theoretical_rdm(rdm.magnitudes, kind,
                                      kind == ModelKind::stevens ? std::optional<double>(v.fits[k].beta) : std::nullopt);
    const std::uint64_t s = splitmix64(seed ^ (static_cast<std::uint64_t>(layer) << 8 | static_cast<std::uint64_t>(k)));
    v.rsa[k] = rsa_mantel(rdm, theo, n_perm, s, threads);
  }
  v.winner = select_model(v.fits).winner;
  const auto& w = v.fit(ModelKind::weber);
  const auto& l = v.fit(ModelKind::linear);
  v.h1_pass = h1_layer_pass(v.rsa_for(ModelKind::weber).rho, v.rsa_for(ModelKind::linear).rho,
                            v.rsa_for(ModelKind::weber).mantel_p, w.aic, l.aic);
  return v;
}

H1Result evaluate_h1(std::span<const LayerVerdict> verdicts, std::size_t first, std::size_t last,
                     std::size_t threshold) {
  std::map<std::size_t, const LayerVerdict*> by_layer;
  for (const auto& v : verdicts) by_layer[v.layer] = &v;
  H1Result r;
  r.threshold = threshold;
  for (std::size_t l = first; l <= last; ++l) {
    auto it = by_layer.find(l);
    if (it == by_layer.end()) throw Error(Errc::missing_layer, fmt::format("no verdict for layer {}", l));
    ++r.evaluated;
    if (it->second->h1_pass) ++r.passing;
  }
  r.pass = r.passing >= threshold;
  return r;
}

namespace {

double ols_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
  const double rss = (y - design * coef).squaredNorm();
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  return 1.0 - rss / tss;
}

}  // namespace

VariancePartition variance_partition(const Rdm& empirical, std::span<const NamedPredictor> predictors) {
  if (predictors.size() < 2) throw Error(Errc::insufficient_data, "variance partition needs at least two predictors");
  const auto yv = empirical.upper();
  const auto m = static_cast<Eigen::Index>(yv.size());
  const auto p = static_cast<Eigen::Index>(predictors.size());
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), m);
  if ((y.array() - y.mean()).matrix().squaredNorm() <= 0.0) {
    throw Error(Errc::zero_variance, "empirical RDM has zero variance");
  }
  Eigen::MatrixXd x(m, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& v = predictors[static_cast<std::size_t>(j)].values;
    if (static_cast<Eigen::Index>(v.size()) != m) {
      throw Error(Errc::shape_mismatch, "predictor '" + predictors[static_cast<std::size_t>(j)].name +
                                            "' does not match the RDM size");
    }
    x.col(j) = Eigen::Map<const Eigen::VectorXd>(v.data(), m);
  }
  Eigen::MatrixXd z = x.rowwise() - x.colwise().mean();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = z.col(j).norm();
    if (norm <= 0.0) {
      throw Error(Errc::collinear, "predictor '" + predictors[static_cast<std::size_t>(j)].name + "' is constant");
    }
    z.col(j) /= norm;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(z);
  const auto sv = svd.singularValues();
  const double cond = sv(p - 1) > 0.0 ? sv(0) / sv(p - 1) : INFINITY;
  if (!(cond <= 1e8)) throw Error(Errc::collinear, fmt::format("predictors are collinear (condition number {:.3g})", cond));

  VariancePartition out;
  out.condition_number = cond;
  out.r2_full = ols_r2(x, y);
  double unique_sum = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::MatrixXd reduced(m, p - 1);
    for (Eigen::Index c = 0, k = 0; c < p; ++c)
      if (c != j) reduced.col(k++) = x.col(c);
    const double part = out.r2_full - ols_r2(reduced, y);
    out.names.push_back(predictors[static_cast<std::size_t>(j)].name);
    out.partial_r2.push_back(part);
    unique_sum += part;
  }
  out.shared_r2 = out.r2_full - unique_sum;
  return out;
}

std::vector<double> digit_count_distances(std::span<const double> magnitudes) {
  std::vector<double> digits;
  for (double m : magnitudes) {
    long v = std::lround(m);
    if (v < 1) throw Error(Errc::invalid_argument, "digit count needs positive integers");
    int d = 0;
    for (; v > 0; v /= 10) ++d;
    digits.push_back(d);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < digits.size(); ++i)
    for (std::size_t j = i + 1; j < digits.size(); ++j) out.push_back(std::abs(digits[i] - digits[j]));
  return out;
}

DigitBoundaryEffect digit_boundary_effect(const Rdm& rdm, std::size_t n_bins) {
  if (n_bins == 0) throw Error(Errc::invalid_argument, "need at least one bin");
  const auto y = rdm.upper();
  const auto crossing = digit_count_distances(rdm.magnitudes);
  const auto x = model_distances(rdm.magnitudes, ModelKind::weber);
  if (std::none_of(crossing.begin(), crossing.end(), [](double c) { return c > 0.0; })) {
    throw Error(Errc::insufficient_data, "magnitudes share a single digit count");
  }
  const auto line = stats::fit_line(x, y);
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  const double width = (hi - lo) / static_cast<double>(n_bins);

  struct Cell {
    std::vector<double> raw, resid;
  };
  std::vector<Cell> cells(2 * n_bins);
  for (std::size_t k = 0; k < y.size(); ++k) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((x[k] - lo) / width) : 0;
    b = std::min(b, n_bins - 1);
    auto& c = cells[2 * b + (crossing[k] > 0.0 ? 1 : 0)];
    c.raw.push_back(y[k]);
    c.resid.push_back(y[k] - (line.intercept + line.slope * x[k]));
  }

  DigitBoundaryEffect out;
  double num = 0.0, wsum = 0.0, ss = 0.0;
  std::size_t used_n = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const auto& same = cells[2 * b];
    const auto& cross = cells[2 * b + 1];
    if (same.raw.empty() && cross.raw.empty()) continue;
    if (same.raw.empty() || cross.raw.empty()) {
      ++out.bins_dropped;
      continue;
    }
    ++out.bins_used;
    out.same_pairs += same.raw.size();
    out.crossing_pairs += cross.raw.size();
    const double n1 = static_cast<double>(cross.raw.size());
    const double n0 = static_cast<double>(same.raw.size());
    const double w = 2.0 * n1 * n0 / (n1 + n0);
    num += w * (stats::mean(cross.resid) - stats::mean(same.resid));
    wsum += w;
    for (const auto* c : {&same, &cross}) {
      const double mu = stats::mean(c->raw);
      for (double v : c->raw) ss += (v - mu) * (v - mu);
    }
    used_n += same.raw.size() + cross.raw.size();
  }
  if (out.bins_used == 0) throw Error(Errc::insufficient_data, "no log-distance bin holds both pair classes");
  const double diff = num / wsum;
  const double dof = static_cast<double>(used_n) - 2.0 * static_cast<double>(out.bins_used);
  const double sd = dof > 0.0 ? std::sqrt(ss / dof) : 0.0;
  if (sd > 0.0) {
    out.cohens_d = diff / sd;
  } else {
    out.cohens_d = std::abs(diff) < 1e-12 ? 0.0 : std::copysign(INFINITY, diff);
  }
  return out;
}

Periodogram lomb_scargle(std::span<const double> t, std::span<const double> y, double oversample) {
  if (t.size() != y.size()) throw Error(Errc::shape_mismatch, "periodogram inputs differ in length");
  Periodogram out;
  if (t.size() < 3) return out;
  std::vector<double> ts(t.begin(), t.end());
  std::sort(ts.begin(), ts.end());
  const double span = ts.back() - ts.front();
  double min_gap = INFINITY;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] - ts[i - 1] > 0.0) min_gap = std::min(min_gap, ts[i] - ts[i - 1]);
  if (!(span > 0.0) || !std::isfinite(min_gap)) return out;

  const double mu = stats::mean(y);
  const double var = stats::variance(y);
  const double f_lo = 1.0 / span;
  const double f_hi = 0.5 / min_gap;
  const double df = 1.0 / (oversample * span);
  for (double f = f_lo; f <= f_hi + 1e-12; f += df) {
    const double w = 2.0 * std::numbers::pi * f;
    double s2 = 0.0, c2 = 0.0;
    for (double ti : t) {
      s2 += std::sin(2.0 * w * ti);
      c2 += std::cos(2.0 * w * ti);
    }
    const double tau = std::atan2(s2, c2) / (2.0 * w);
    double yc = 0.0, ys = 0.0, cc = 0.0, sss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double c = std::cos(w * (t[i] - tau));
      const double s = std::sin(w * (t[i] - tau));
      yc += (y[i] - mu) * c;
      ys += (y[i] - mu) * s;
      cc += c * c;
      sss += s * s;
    }
    double p = 0.0;
    if (var > 0.0) p = ((cc > 0.0 ? yc * yc / cc : 0.0) + (sss > 0.0 ? ys * ys / sss : 0.0)) / (2.0 * var);
    out.frequency.push_back(f);
    out.power.push_back(p);
  }
  const auto peak = std::max_element(out.power.begin(), out.power.end());
  if (peak != out.power.end() && *peak > 0.0) {
    const auto i = static_cast<std::size_t>(peak - out.power.begin());
    out.peak_power = *peak;
    out.dominant_frequency = out.frequency[i];
    out.dominant_period = 1.0 / out.frequency[i];
  }
  return out;
}

PeriodicityReport residual_periodicity(const GeometricFit& fit, const Rdm& rdm) {
  if (fit.rdm_checksum != rdm.checksum()) throw Error(Errc::checksum_mismatch, "fit was computed on a different RDM");
  PeriodicityReport out;
  out.r2 = fit.r2;
  out.trigger = fit.r2 < kPeriodicityTrigger;
  const std::size_t n = rdm.n();
  const auto x = model_distances(rdm.magnitudes, fit.kind, fit.beta);
  out.residual_by_magnitude.assign(n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double e = rdm.at(i, j) - (fit.a + fit.b * x[k]);
      out.residual_by_magnitude[i] += e;
      out.residual_by_magnitude[j] += e;
    }
  }
  for (auto& v : out.residual_by_magnitude) v /= static_cast<double>(n - 1);
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(rdm.magnitudes[i]);
  out.by_value = lomb_scargle(rdm.magnitudes, out.residual_by_magnitude);
  out.by_log_value = lomb_scargle(logs, out.residual_by_magnitude);
  return out;
}

json to_json(const Rdm& rdm) {
  return {{"metric", to_string(rdm.metric)}, {"magnitudes", rdm.magnitudes}, {"upper", rdm.upper()}};
}

json to_json(const GeometricFit& f) {
  json j = {{"kind", to_string(f.kind)}, {"a", f.a},     {"b", f.b},   {"r2", f.r2},
            {"rss", f.rss},              {"aic", f.aic}, {"n_params", f.n_params}};
  if (f.kind == ModelKind::stevens) j["beta"] = f.beta;
  return j;
}

json to_json(const RsaResult& r) {
  return {{"rho", r.rho}, {"mantel_p", r.mantel_p}, {"n_permutations", r.n_permutations}, {"seed", r.seed},
          {"exact", r.exact}};
}

json to_json(const LayerVerdict& v) {
  json fits = json::object(), rsa = json::object();
  for (auto k : {ModelKind::linear, ModelKind::weber, ModelKind::stevens}) {
    fits[std::string(to_string(k))] = to_json(v.fit(k));
    rsa[std::string(to_string(k))] = to_json(v.rsa_for(k));
  }
  return {{"layer", v.layer}, {"metric", to_string(v.metric)}, {"fits", fits},
          {"rsa", rsa},       {"winner", to_string(v.winner)},  {"h1_pass", v.h1_pass}};
}

json to_json(const H1Result& r) {
  return {{"pass", r.pass}, {"passing", r.passing}, {"evaluated", r.evaluated}, {"threshold", r.threshold}};
}

json to_json(const VariancePartition& v) {
  json partial = json::object();
  for (std::size_t i = 0; i < v.names.size(); ++i) partial[v.names[i]] = v.partial_r2[i];
  return {{"r2_full", v.r2_full}, {"partial_r2", partial}, {"shared_r2", v.shared_r2},
          {"condition_number", v.condition_number}};
}

json to_json(const DigitBoundaryEffect& d) {
  return {{"cohens_d", d.cohens_d},         {"bins_used", d.bins_used},   {"bins_dropped", d.bins_dropped},
          {"crossing_pairs", d.crossing_pairs}, {"same_pairs", d.same_pairs}};
}

json to_json(const Periodogram& p) {
  return {{"dominant_frequency", p.dominant_frequency},
          {"dominant_period", p.dominant_period},
          {"peak_power", p.peak_power},
          {"frequency", p.frequency},
          {"power", p.power}};
}

json to_json(const PeriodicityReport& p) {
  return {{"trigger", p.trigger},
          {"r2", p.r2},
          {"residual_by_magnitude", p.residual_by_magnitude},
          {"by_value", to_json(p.by_value)},
          {"by_log_value", to_json(p.by_log_value)}};
}

}  // namespace weber::geometry
