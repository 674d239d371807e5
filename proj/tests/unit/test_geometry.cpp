#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "weber/error.hpp"
#include "weber/geometry.hpp"
#include "weber/stats.hpp"

using namespace weber;
using namespace weber::geometry;

namespace {

// One layer, one centroid per magnitude, placed at the given 1-d coordinates.
CentroidSet line_centroids(std::vector<double> mags, std::vector<double> coords, std::size_t dim = 2) {
  CentroidSet c;
  c.n_layers = 1;
  c.dim = dim;
  c.magnitudes = std::move(mags);
  c.carrier_counts.assign(c.magnitudes.size(), 1);
  c.data.assign(c.magnitudes.size() * dim, 0.0);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    c.row(0, i)[0] = coords[i];
    if (dim > 1) c.row(0, i)[1] = 1.0;
  }
  return c;
}

Rdm exact_rdm(const std::vector<double>& mags, ModelKind kind, double a, double b, double beta = 1.0) {
  auto u = model_distances(mags, kind, beta);
  for (auto& v : u) v = a + b * v;
  return rdm_from_upper(mags, u, Metric::euclidean);
}

const std::vector<double> kMags{1, 2, 3, 5, 8, 13, 20, 50, 100, 300, 1000};

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("euclidean RDM of points on a line") {
    const auto c = line_centroids({1, 2, 3}, {0, 1, 3});
    const auto r = compute_rdm(c, 0, Metric::euclidean);
    CHECK(r.upper() == std::vector<double>{1, 3, 2});
    CHECK(r.at(2, 0) == 3.0);
  }

  TEST_CASE("cosine RDM") {
    const auto c = line_centroids({1, 2, 3}, {0, 1, -1});
    const auto r = compute_rdm(c, 0, Metric::cosine);
    // (0,1) vs (1,1): 1 - 1/sqrt2; (0,1) vs (-1,1) same; (1,1) vs (-1,1): 1
    CHECK(r.at(0, 1) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
    CHECK(r.at(0, 2) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
    CHECK(r.at(1, 2) == doctest::Approx(1.0));
    auto z = line_centroids({1, 2, 3}, {0, 1, 2}, 1);
    CHECK_THROWS_AS(compute_rdm(z, 0, Metric::cosine), Error);
    CHECK_THROWS_AS(compute_rdm(c, 1, Metric::euclidean), Error);
  }

  TEST_CASE("model distances") {
    const std::vector<double> m{1, 10, 100};
    const auto w = model_distances(m, ModelKind::weber);
    CHECK(w[0] == doctest::Approx(std::log(10.0)));
    CHECK(w[1] == doctest::Approx(std::log(100.0)));
    CHECK(model_distances(m, ModelKind::linear) == std::vector<double>{9, 99, 90});
    const auto s = model_distances(m, ModelKind::stevens, 0.5);
    CHECK(s[1] == doctest::Approx(9.0));
  }

  TEST_CASE("theoretical RDM is z-scored") {
    const auto t = theoretical_rdm(kMags, ModelKind::weber);
    const auto u = t.upper();
    CHECK(stats::mean(u) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(stats::stddev(u) == doctest::Approx(1.0));
    CHECK_THROWS_AS(theoretical_rdm(kMags, ModelKind::stevens), Error);
    CHECK_THROWS_AS(theoretical_rdm(kMags, ModelKind::weber, 0.5), Error);
  }

  TEST_CASE("exact weber RDM is recovered") {
    const auto r = exact_rdm(kMags, ModelKind::weber, 0.1, 2.0);
    const auto f = fit_geometry(r, ModelKind::weber);
    CHECK(f.a == doctest::Approx(0.1));
    CHECK(f.b == doctest::Approx(2.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    const GeometricFit fits[3] = {fit_geometry(r, ModelKind::linear), f, fit_geometry(r, ModelKind::stevens)};
    CHECK(select_model(fits).winner == ModelKind::weber);
  }

  TEST_CASE("stevens exponent recovered") {
    for (double beta : {0.01, 0.3, 0.5, 1.0, 1.7}) {
      const auto r = exact_rdm(kMags, ModelKind::stevens, 0.0, 1.0, beta);
      CHECK(fit_geometry(r, ModelKind::stevens).beta == doctest::Approx(beta).epsilon(1e-3));
    }
  }

  TEST_CASE("AIC form") {
    // m ln(RSS/m) + 2k
    CHECK(least_squares_aic(10.0, 10, 3) == doctest::Approx(6.0));
    CHECK(least_squares_aic(20.0, 10, 3) == doctest::Approx(10 * std::log(2.0) + 6.0));
    CHECK(std::isfinite(least_squares_aic(0.0, 10, 3)));
  }

  TEST_CASE("ties go to the simpler model") {
    const auto r = exact_rdm(kMags, ModelKind::linear, 0.0, 1.0);
    GeometricFit a = fit_geometry(r, ModelKind::linear), b = a;
    b.kind = ModelKind::stevens;
    b.n_params = 3;
    const GeometricFit fits[2] = {b, a};
    CHECK(select_model(fits).winner == ModelKind::linear);
    GeometricFit other = a;
    other.rdm_checksum ^= 1;
    const GeometricFit mixed[2] = {a, other};
    CHECK_THROWS_AS(select_model(mixed), Error);
  }

  TEST_CASE("exact Mantel against independent enumeration") {
    const std::vector<double> mags{1, 2, 4, 8};
    const auto emp = rdm_from_upper(mags, std::vector<double>{0.5, 1.4, 2.0, 0.7, 1.1, 0.9}, Metric::euclidean);
    const auto theo = theoretical_rdm(mags, ModelKind::weber);
    const auto got = rsa_mantel_exact(emp, theo);

    const auto e = emp.upper();
    std::vector<std::size_t> p{0, 1, 2, 3};
    const double observed = stats::spearman(e, theo.upper());
    int hits = 0, total = 0;
    do {
      std::vector<double> t;
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) t.push_back(theo.at(p[i], p[j]));
      ++total;
      if (stats::spearman(e, t) >= observed - 1e-12) ++hits;
    } while (std::next_permutation(p.begin(), p.end()));

    CHECK(total == 24);
    CHECK(got.rho == doctest::Approx(observed));
    CHECK(got.mantel_p == doctest::Approx(double(hits) / 24.0));
    CHECK(got.n_permutations == 24);

    const auto mc = rsa_mantel(emp, theo, 20000, 5, 1);
    CHECK(mc.mantel_p == doctest::Approx(got.mantel_p).epsilon(0.15));
  }

  TEST_CASE("Mantel is independent of thread count") {
    const auto emp = exact_rdm(kMags, ModelKind::weber, 0.0, 1.0);
    const auto theo = theoretical_rdm(kMags, ModelKind::linear);
    const auto a = rsa_mantel(emp, theo, 1000, 11, 1);
    const auto b = rsa_mantel(emp, theo, 1000, 11, 4);
    CHECK(a.mantel_p == b.mantel_p);
    CHECK(a.rho == b.rho);
    CHECK_THROWS_AS(rsa_mantel(emp, theo, 10, 1, 1), Error);
  }

  TEST_CASE("H1 layer rule and count") {
    CHECK(h1_layer_pass(0.9, 0.8, 0.01, -10, -5));
    CHECK_FALSE(h1_layer_pass(0.9, 0.8, 0.017, -10, -5));
    CHECK_FALSE(h1_layer_pass(0.8, 0.9, 0.001, -10, -5));
    CHECK_FALSE(h1_layer_pass(0.9, 0.8, 0.001, -5, -10));
    std::vector<LayerVerdict> v(12);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i].layer = i;
      v[i].h1_pass = i >= 3;
    }
    const auto r = evaluate_h1(v, 0, 11, 9);
    CHECK(r.passing == 9);
    CHECK(r.pass);
    CHECK_FALSE(evaluate_h1(v, 0, 11, 10).pass);
    CHECK_THROWS_AS(evaluate_h1(v, 0, 12, 9), Error);
  }

  TEST_CASE("variance partition") {
    const auto r = exact_rdm(kMags, ModelKind::weber, 0.0, 1.0);
    const std::vector<NamedPredictor> preds{{"log", model_distances(kMags, ModelKind::weber)},
                                            {"linear", model_distances(kMags, ModelKind::linear)}};
    const auto vp = variance_partition(r, preds);
    CHECK(vp.r2_full == doctest::Approx(1.0));
    CHECK(vp.partial_r2[0] > vp.partial_r2[1]);
    auto lin = model_distances(kMags, ModelKind::linear);
    auto twice = lin;
    for (auto& v : twice) v *= 2.0;
    const std::vector<NamedPredictor> dup{{"a", lin}, {"b", twice}};
    CHECK_THROWS_AS(variance_partition(r, dup), Error);
  }

  TEST_CASE("no digit boundary effect on an exact log RDM") {
    const auto r = exact_rdm(kMags, ModelKind::weber, 0.0, 1.0);
    const auto d = digit_boundary_effect(r);
    CHECK(d.cohens_d == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(d.bins_used > 0);
    const std::vector<double> one_digit{1, 2, 3, 4};
    CHECK_THROWS_AS(digit_boundary_effect(exact_rdm(one_digit, ModelKind::weber, 0, 1)), Error);
  }

  TEST_CASE("Lomb-Scargle finds a planted period") {
    std::vector<double> t, y;
    for (int i = 0; i < 100; ++i) {
      t.push_back(i);
      y.push_back(std::sin(2.0 * std::numbers::pi * i / 10.0));
    }
    const auto p = lomb_scargle(t, y);
    CHECK(p.dominant_period == doctest::Approx(10.0).epsilon(0.02));
  }

  TEST_CASE("layer analysis on log-placed centroids") {
    std::vector<double> coords;
    for (double m : kMags) coords.push_back(std::log(m));
    const auto c = line_centroids(kMags, coords);
    const auto v = analyze_layer(c, 0, Metric::euclidean, 2000, 3, 1);
    CHECK(v.winner == ModelKind::weber);
    CHECK(v.h1_pass);
    // equal ratios are ties only up to rounding
    CHECK(v.rsa_for(ModelKind::weber).rho > 0.9999);
  }
}
