#include "weber/behaviour.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/optimize.hpp"
#include "weber/rng.hpp"

namespace weber::behaviour {

using nlohmann::json;

std::string_view to_string(Predictor p) { return p == Predictor::log_ratio ? "log_ratio" : "abs_diff"; }

std::string_view to_string(WfStatus s) {
  switch (s) {
    case WfStatus::finite: return "finite";
    case WfStatus::infinite: return "infinite";
    case WfStatus::below_range: return "below_range";
  }
  return "?";
}

Statistic parse_statistic(std::string_view s) {
  if (s == "wf") return Statistic::wf;
  if (s == "accuracy") return Statistic::accuracy;
  throw Error(Errc::invalid_argument, fmt::format("unknown statistic '{}'", s));
}

AccuracyTable accuracy_by_ratio(std::span<const TrialRecord> trials) {
  std::map<double, std::pair<std::size_t, std::size_t>> pooled;
  std::map<std::pair<double, double>, std::pair<std::size_t, std::size_t>> cells;
  AccuracyTable t;
  std::size_t hits = 0;
  for (const auto& r : trials) {
    auto& p = pooled[r.ratio];
    auto& c = cells[{r.baseline, r.ratio}];
    ++p.first;
    ++c.first;
    if (r.correct) {
      ++p.second;
      ++c.second;
      ++hits;
    }
  }
  auto row = [](double baseline, double ratio, std::pair<std::size_t, std::size_t> nk) {
    AccuracyRow r;
    r.baseline = baseline;
    r.ratio = ratio;
    r.n = nk.first;
    r.correct = nk.second;
    r.accuracy = static_cast<double>(nk.second) / static_cast<double>(nk.first);
    r.ci = stats::wilson_interval(nk.second, nk.first);
    return r;
  };
  for (const auto& [ratio, nk] : pooled) t.by_ratio.push_back(row(NAN, ratio, nk));
  for (const auto& [key, nk] : cells) t.by_cell.push_back(row(key.first, key.second, nk));
  t.n = trials.size();
  t.overall = trials.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials.size());
  return t;
}

double deviance_p(double delta) { return stats::chi2_sf_df1(std::abs(delta)); }

LogisticModel logistic_irls(const std::vector<std::vector<double>>& x, std::span<const double> successes,
                            std::span<const double> totals, std::span<const std::string> names) {
  const auto m = static_cast<Eigen::Index>(x.size());
  if (m == 0) throw Error(Errc::empty_input, "logistic regression needs data");
  const auto p = static_cast<Eigen::Index>(x[0].size()) + 1;
  if (static_cast<Eigen::Index>(names.size()) != p - 1) throw Error(Errc::shape_mismatch, "term names do not match");
  Eigen::MatrixXd X(m, p);
  Eigen::VectorXd k(m), n(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) X(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
    k(i) = successes[static_cast<std::size_t>(i)];
    n(i) = totals[static_cast<std::size_t>(i)];
  }
  double saturated = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (k(i) > 0.0) saturated += k(i) * std::log(k(i) / n(i));
    if (n(i) > k(i)) saturated += (n(i) - k(i)) * std::log(1.0 - k(i) / n(i));
  }
  auto deviance = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double ll = -saturated;
    for (Eigen::Index i = 0; i < m; ++i)
      ll += k(i) * stats::log_logistic(eta(i)) + (n(i) - k(i)) * stats::log_logistic(-eta(i));
    return -2.0 * ll;
  };
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd info(p, p);
  LogisticModel model;
  double dev = deviance(beta);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd w(m), score_w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double mu = stats::logistic(eta(i));
      w(i) = n(i) * std::max(mu * (1.0 - mu), 1e-12);
      score_w(i) = k(i) - n(i) * mu;
    }
    info = X.transpose() * w.asDiagonal() * X;
    const Eigen::VectorXd score = X.transpose() * score_w;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
      throw Error(Errc::rank_deficient, "logistic design is rank deficient");
    }
    Eigen::VectorXd step = ldlt.solve(score);
    // step halving keeps the deviance from increasing
    double next = deviance(beta + step);
    for (int h = 0; h < 30 && next > dev + 1e-12; ++h) {
      step *= 0.5;
      next = deviance(beta + step);
    }
    beta += step;
    const double change = dev - next;
    dev = next;
    if (step.cwiseAbs().maxCoeff() < 1e-10 || std::abs(change) < 1e-12) {
      model.converged = true;
      break;
    }
  }
  const Eigen::MatrixXd cov = info.inverse();
  model.deviance = dev;
  for (Eigen::Index j = 0; j < p; ++j) {
    WaldTerm t;
    t.name = j == 0 ? "intercept" : names[static_cast<std::size_t>(j - 1)];
    t.estimate = beta(j);
    t.se = std::sqrt(std::max(0.0, cov(j, j)));
    t.z = t.se > 0.0 ? t.estimate / t.se : 0.0;
    t.p = std::erfc(std::abs(t.z) / std::numbers::sqrt2);
    model.terms.push_back(t);
  }
  return model;
}

namespace {

int sign_of(Position p) { return p == Position::A ? 1 : -1; }

struct GroupedCells {
  std::vector<double> baseline, ratio;
  std::vector<int> sign;
  std::vector<double> k, n;
};

GroupedCells group_cells(std::span<const TrialRecord> trials) {
  std::map<std::tuple<double, double, int>, std::pair<double, double>> cells;
  for (const auto& t : trials) {
    auto& c = cells[{t.baseline, t.ratio, sign_of(t.large_position)}];
    c.second += 1.0;
    if (t.correct) c.first += 1.0;
  }
  GroupedCells g;
  for (const auto& [key, kn] : cells) {
    g.baseline.push_back(std::get<0>(key));
    g.ratio.push_back(std::get<1>(key));
    g.sign.push_back(std::get<2>(key));
    g.k.push_back(kn.first);
    g.n.push_back(kn.second);
  }
  return g;
}

std::vector<double> standardise(std::vector<double> v, std::span<const double> weights) {
  double wsum = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    mu += weights[i] * v[i];
    wsum += weights[i];
  }
  mu /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) var += weights[i] * (v[i] - mu) * (v[i] - mu);
  const double sd = std::sqrt(var / wsum);
  for (auto& x : v) x = sd > 0.0 ? (x - mu) / sd : x - mu;
  return v;
}

}  // namespace

DevianceTest delta_deviance_test(std::span<const TrialRecord> trials) {
  const auto g = group_cells(trials);
  std::vector<double> ratios(g.ratio), baselines(g.baseline);
  std::sort(ratios.begin(), ratios.end());
  std::sort(baselines.begin(), baselines.end());
  if (std::unique(ratios.begin(), ratios.end()) - ratios.begin() < 2 ||
      std::unique(baselines.begin(), baselines.end()) - baselines.begin() < 2) {
    throw Error(Errc::insufficient_data, "deviance test needs at least two ratios and two baselines");
  }
  DevianceTest out;
  const double hits = std::accumulate(g.k.begin(), g.k.end(), 0.0);
  const double total = std::accumulate(g.n.begin(), g.n.end(), 0.0);
  if (hits == 0.0 || hits == total) {
    out.separated = true;
    out.p = NAN;
    return out;
  }
  auto fit = [&](Predictor pred) {
    std::vector<double> v(g.ratio.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = pred == Predictor::log_ratio ? std::log(g.ratio[i]) : g.baseline[i] * (g.ratio[i] - 1.0);
    v = standardise(std::move(v), g.n);
    std::vector<std::vector<double>> x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = {v[i], static_cast<double>(g.sign[i])};
    const std::string names[] = {std::string(to_string(pred)), "position"};
    return logistic_irls(x, g.k, g.n, names).deviance;
  };
  out.deviance_log = fit(Predictor::log_ratio);
  out.deviance_abs = fit(Predictor::abs_diff);
  out.delta_dev = out.deviance_abs - out.deviance_log;
  out.p = deviance_p(out.delta_dev);
  out.winner = out.delta_dev > 0.0 ? Predictor::log_ratio : Predictor::abs_diff;
  return out;
}

double PsychometricFit::predict(double ratio, int position_sign) const {
  return lapse + (1.0 - 2.0 * lapse) * stats::logistic(slope * std::log(ratio) + position_bias * position_sign);
}

CellCounts tally(std::span<const TrialRecord> trials) {
  std::map<std::pair<double, int>, std::pair<double, double>> cells;
  for (const auto& t : trials) {
    auto& c = cells[{t.ratio, sign_of(t.large_position)}];
    c.second += 1.0;
    if (t.correct) c.first += 1.0;
  }
  CellCounts out;
  for (const auto& [key, kn] : cells) {
    out.log_ratio.push_back(std::log(key.first));
    out.position_sign.push_back(key.second);
    out.correct.push_back(kn.first);
    out.total.push_back(kn.second);
  }
  return out;
}

namespace {

double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct PsyParams {
  double slope, bias, lapse;
};

PsyParams decode(std::span<const double> th) {
  const double t0 = std::clamp(th[0], -12.0, 12.0);
  const double t1 = std::clamp(th[1], -50.0, 50.0);
  const double t2 = std::clamp(th[2], -40.0, 40.0);
  return {std::exp(t0), t1, 0.1 * stats::logistic(t2)};
}

double psy_nll(const CellCounts& c, const PsyParams& q) {
  const double log_lapse = q.lapse > 0.0 ? std::log(q.lapse) : -INFINITY;
  const double log_body = std::log1p(-2.0 * q.lapse);
  double nll = 0.0;
  for (std::size_t i = 0; i < c.total.size(); ++i) {
    if (c.total[i] <= 0.0) continue;
    const double z = q.slope * c.log_ratio[i] + q.bias * c.position_sign[i];
    const double lp = log_add_exp(log_lapse, log_body + stats::log_logistic(z));
    const double lq = log_add_exp(log_lapse, log_body + stats::log_logistic(-z));
    nll -= c.correct[i] * lp + (c.total[i] - c.correct[i]) * lq;
  }
  return nll;
}

constexpr int kMaxRestarts = 50;
constexpr double kFitTol = 1e-6;

}  // namespace

PsychometricFit fit_psychometric(const CellCounts& cells) {
  std::vector<double> levels(cells.log_ratio);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() < 3) throw Error(Errc::insufficient_data, "psychometric fit needs at least three ratio levels");
  auto f = [&](std::span<const double> th) { return psy_nll(cells, decode(th)); };
  const double step[] = {1.0, 0.5, 1.0};

  optimize::SimplexResult best;
  best.value = INFINITY;
  int restarts = 0;
  for (double s0 : {0.0, 1.6, 3.0}) {
    for (double s2 : {-3.0, 1.0}) {
      const double start[] = {s0, 0.0, s2};
      auto r = optimize::nelder_mead(f, start, step, kFitTol);
      ++restarts;
      if (r.value < best.value) best = std::move(r);
    }
  }
  bool settled = false;
  while (restarts < kMaxRestarts) {
    auto r = optimize::nelder_mead(f, best.x, step, kFitTol);
    ++restarts;
    const bool small = best.value - r.value < kFitTol;
    if (r.value < best.value) best = std::move(r);
    if (small && best.converged) {
      settled = true;
      break;
    }
  }
  if (!settled) throw Error(Errc::non_convergence, "psychometric fit did not converge after 50 restarts");

  const PsyParams q = decode(best.x);
  PsychometricFit fit;
  fit.slope = q.slope;
  fit.position_bias = q.bias;
  fit.lapse = q.lapse;
  fit.deviance = 2.0 * best.value;
  fit.restarts = restarts;

  const double max_ratio = std::exp(levels.back());
  const double min_ratio = std::exp(levels.front());
  auto marginal = [&](double x) {
    return 0.5 * (fit.predict(std::exp(x), 1) + fit.predict(std::exp(x), -1));
  };
  double lo = 0.0;
  double hi = std::log(10.0 * max_ratio);
  if (marginal(hi) < 0.75) {
    fit.wf = INFINITY;
    fit.status = WfStatus::infinite;
    return fit;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (marginal(mid) < 0.75 ? lo : hi) = mid;
  }
  fit.wf = std::exp(0.5 * (lo + hi)) - 1.0;
  fit.status = fit.wf < min_ratio - 1.0 ? WfStatus::below_range : WfStatus::finite;
  return fit;
}

PsychometricFit fit_psychometric(std::span<const TrialRecord> trials) { return fit_psychometric(tally(trials)); }

namespace {

// Trials reduced to distinct (ratio, position, correct) types; the bootstrap
// and jackknife only ever reweight these.
struct TypeTable {
  std::vector<double> log_ratio;
  std::vector<int> sign;
  std::vector<bool> correct;
  std::vector<double> count;
  std::vector<std::size_t> type_of_trial;
};

TypeTable build_types(std::span<const TrialRecord> trials) {
  std::map<std::tuple<double, int, bool>, std::size_t> index;
  TypeTable t;
  for (const auto& r : trials) {
    const auto key = std::make_tuple(r.ratio, sign_of(r.large_position), r.correct);
    auto it = index.find(key);
    if (it == index.end()) it = index.emplace(key, index.size()).first;
    t.type_of_trial.push_back(it->second);
  }
  const std::size_t nt = index.size();
  t.log_ratio.resize(nt);
  t.sign.resize(nt);
  t.correct.resize(nt);
  t.count.assign(nt, 0.0);
  for (const auto& [key, i] : index) {
    t.log_ratio[i] = std::log(std::get<0>(key));
    t.sign[i] = std::get<1>(key);
    t.correct[i] = std::get<2>(key);
  }
  for (auto i : t.type_of_trial) t.count[i] += 1.0;
  return t;
}

double evaluate_statistic(const TypeTable& t, std::span<const double> w, Statistic s) {
  if (s == Statistic::accuracy) {
    double k = 0.0, n = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      n += w[i];
      if (t.correct[i]) k += w[i];
    }
    return n > 0.0 ? k / n : NAN;
  }
  std::map<std::pair<double, int>, std::pair<double, double>> cells;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    auto& c = cells[{t.log_ratio[i], t.sign[i]}];
    c.second += w[i];
    if (t.correct[i]) c.first += w[i];
  }
  CellCounts cc;
  for (const auto& [key, kn] : cells) {
    cc.log_ratio.push_back(key.first);
    cc.position_sign.push_back(key.second);
    cc.correct.push_back(kn.first);
    cc.total.push_back(kn.second);
  }
  try {
    const auto fit = fit_psychometric(cc);
    return fit.status == WfStatus::infinite ? NAN : fit.wf;
  } catch (const Error&) {
    return NAN;
  }
}

}  // namespace

BcaInterval bca_ci(std::span<const TrialRecord> trials, Statistic statistic, int B, std::uint64_t seed,
                   double level) {
  if (B < 1000) throw Error(Errc::invalid_argument, "BCa needs at least 1000 bootstrap replicates");
  if (trials.empty()) throw Error(Errc::empty_input, "no trials to resample");
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::invalid_argument, "confidence level must lie in (0, 1)");
  const TypeTable types = build_types(trials);
  const std::size_t nt = types.count.size();
  const std::size_t n = trials.size();

  BcaInterval out;
  out.replicates = B;
  out.estimate = evaluate_statistic(types, types.count, statistic);
  if (std::isnan(out.estimate)) {
    out.unstable = true;
    out.lo = out.hi = NAN;
    return out;
  }

  std::vector<double> reps;
  reps.reserve(static_cast<std::size_t>(B));
  std::vector<double> w(nt);
  for (int b = 0; b < B; ++b) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(b));
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) w[types.type_of_trial[rng.below(n)]] += 1.0;
    const double v = evaluate_statistic(types, w, statistic);
    if (std::isnan(v)) {
      ++out.undefined;
    } else {
      reps.push_back(v);
    }
  }
  out.unstable = static_cast<double>(out.undefined) > 0.2 * B;
  if (reps.empty()) {
    out.lo = out.hi = NAN;
    return out;
  }
  std::sort(reps.begin(), reps.end());
  const double m = static_cast<double>(reps.size());
  double below = 0.0;
  for (double v : reps) {
    if (v < out.estimate) below += 1.0;
    else if (v == out.estimate) below += 0.5;
  }
  const double frac = std::clamp(below / m, 0.5 / m, 1.0 - 0.5 / m);
  out.z0 = stats::normal_quantile(frac);

  std::vector<double> jack(nt, NAN);
  double jw = 0.0, jmean = 0.0;
  std::vector<double> wj(types.count);
  for (std::size_t t = 0; t < nt; ++t) {
    wj[t] -= 1.0;
    jack[t] = evaluate_statistic(types, wj, statistic);
    wj[t] += 1.0;
    if (!std::isnan(jack[t])) {
      jmean += types.count[t] * jack[t];
      jw += types.count[t];
    }
  }
  double num = 0.0, den = 0.0;
  if (jw > 0.0) {
    jmean /= jw;
    for (std::size_t t = 0; t < nt; ++t) {
      if (std::isnan(jack[t])) continue;
      const double d = jmean - jack[t];
      num += types.count[t] * d * d * d;
      den += types.count[t] * d * d;
    }
  }
  out.acceleration = den > 0.0 ? num / (6.0 * std::pow(den, 1.5)) : 0.0;

  const double alpha = 0.5 * (1.0 - level);
  auto adjusted = [&](double q) {
    const double z = stats::normal_quantile(q);
    return stats::normal_cdf(out.z0 + (out.z0 + z) / (1.0 - out.acceleration * (out.z0 + z)));
  };
  out.lo = stats::quantile_sorted(reps, adjusted(alpha));
  out.hi = stats::quantile_sorted(reps, adjusted(1.0 - alpha));
  return out;
}

EntropyDiagnostic entropy_diagnostic(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw Error(Errc::empty_input, "no valid trials for the entropy diagnostic");
  double s = 0.0;
  for (const auto& t : trials) s += stats::binary_entropy(t.p_a / (t.p_a + t.p_b));
  EntropyDiagnostic d;
  d.mean_entropy = s / static_cast<double>(trials.size());
  d.approximate = d.mean_entropy > kEntropyThreshold;
  return d;
}

double dprime_2afc(double p_correct, std::size_t n) {
  if (n == 0) throw Error(Errc::invalid_argument, "d' needs a positive trial count");
  const double lo = 1.0 / (2.0 * static_cast<double>(n));
  return std::numbers::sqrt2 * stats::normal_quantile(std::clamp(p_correct, lo, 1.0 - lo));
}

DprimeProfile dprime_profile(std::span<const TrialRecord> trials, std::size_t min_cell) {
  const auto table = accuracy_by_ratio(trials);
  DprimeProfile out;
  std::map<double, std::vector<double>> by_ratio;
  for (const auto& row : table.by_cell) {
    if (row.n < min_cell) {
      ++out.skipped_cells;
      continue;
    }
    DprimeCell c{row.baseline, row.ratio, row.n, row.accuracy, dprime_2afc(row.accuracy, row.n)};
    out.cells.push_back(c);
    by_ratio[row.ratio].push_back(c.dprime);
  }
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& [ratio, ds] : by_ratio) {
    if (ds.size() < 2) continue;
    const double mu = stats::mean(ds);
    if (mu == 0.0) continue;
    const double cv = stats::stddev(ds) / std::abs(mu);
    out.ratios.push_back(ratio);
    out.cv_by_ratio.push_back(cv);
    total += cv;
    ++used;
  }
  out.mean_cv = used > 0 ? total / static_cast<double>(used) : NAN;
  return out;
}

LogisticModel distance_ratio_model(std::span<const TrialRecord> trials) {
  const auto g = group_cells(trials);
  std::vector<double> dist(g.ratio.size()), lr(g.ratio.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    dist[i] = g.baseline[i] * (g.ratio[i] - 1.0);
    lr[i] = std::log(g.ratio[i]);
  }
  dist = standardise(std::move(dist), g.n);
  lr = standardise(std::move(lr), g.n);
  std::vector<std::vector<double>> x(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) x[i] = {dist[i], lr[i], dist[i] * lr[i], static_cast<double>(g.sign[i])};
  const std::string names[] = {"distance", "ratio", "interaction", "position"};
  return logistic_irls(x, g.k, g.n, names);
}

json to_json(const AccuracyTable& t) {
  auto rows = [](const std::vector<AccuracyRow>& v, bool with_baseline) {
    json a = json::array();
    for (const auto& r : v) {
      json j = {{"ratio", r.ratio}, {"n", r.n},          {"correct", r.correct},
                {"accuracy", r.accuracy}, {"ci_lo", r.ci.lo}, {"ci_hi", r.ci.hi}};
      if (with_baseline) j["baseline"] = r.baseline;
      a.push_back(std::move(j));
    }
    return a;
  };
  return {{"overall", t.overall}, {"n", t.n}, {"by_ratio", rows(t.by_ratio, false)}, {"by_cell", rows(t.by_cell, true)}};
}

json to_json(const DevianceTest& d) {
  json j = {{"deviance_log_ratio", d.deviance_log}, {"deviance_abs_diff", d.deviance_abs},
            {"delta_dev", d.delta_dev},             {"winner", to_string(d.winner)},
            {"separated", d.separated}};
  j["p"] = std::isnan(d.p) ? json(nullptr) : json(d.p);
  return j;
}

json to_json(const PsychometricFit& f) {
  json j = {{"slope", f.slope},       {"lapse", f.lapse},       {"position_bias", f.position_bias},
            {"deviance", f.deviance}, {"restarts", f.restarts}, {"wf_status", to_string(f.status)}};
  j["wf"] = std::isfinite(f.wf) ? json(f.wf) : json(nullptr);
  return j;
}

json to_json(const BcaInterval& b) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"estimate", num(b.estimate)}, {"lo", num(b.lo)},         {"hi", num(b.hi)},
          {"z0", b.z0},                  {"acceleration", b.acceleration}, {"replicates", b.replicates},
          {"undefined", b.undefined},    {"unstable", b.unstable}};
}

json to_json(const EntropyDiagnostic& e) {
  return {{"mean_entropy", e.mean_entropy}, {"mode", e.approximate ? "approximate" : "exact"}};
}

json to_json(const DprimeProfile& d) {
  json cells = json::array();
  for (const auto& c : d.cells) {
    cells.push_back({{"baseline", c.baseline}, {"ratio", c.ratio}, {"n", c.n}, {"p_correct", c.p_correct},
                     {"dprime", c.dprime}});
  }
  json j = {{"cells", cells}, {"ratios", d.ratios}, {"cv_by_ratio", d.cv_by_ratio}, {"skipped_cells", d.skipped_cells}};
  j["mean_cv"] = std::isfinite(d.mean_cv) ? json(d.mean_cv) : json(nullptr);
  return j;
}

json to_json(const LogisticModel& m) {
  json terms = json::object();
  for (const auto& t : m.terms) terms[t.name] = {{"estimate", t.estimate}, {"se", t.se}, {"z", t.z}, {"p", t.p}};
  return {{"terms", terms}, {"deviance", m.deviance}, {"converged", m.converged}};
}

}  // namespace weber::behaviour
