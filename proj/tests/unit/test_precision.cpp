#include <doctest.h>

#include <cmath>
#include <vector>

#include "weber/error.hpp"
#include "weber/precision.hpp"

using namespace weber;
using namespace weber::precision;

namespace {

CentroidSet placed(const std::vector<double>& mags, double (*g)(double)) {
  CentroidSet c;
  c.n_layers = 1;
  c.dim = 2;
  c.magnitudes = mags;
  c.carrier_counts.assign(mags.size(), 1);
  c.data.assign(mags.size() * 2, 0.0);
  for (std::size_t i = 0; i < mags.size(); ++i) {
    c.row(0, i)[0] = g(mags[i]);
    c.row(0, i)[1] = 0.5;
  }
  return c;
}

double ln(double x) { return std::log(x); }
double ident(double x) { return x; }

}  // namespace

TEST_SUITE("precision") {
  TEST_CASE("exact Spearman p for small n") {
    CHECK(spearman_p(23.0 / 28.0, 7) == doctest::Approx(0.034126984126984124).epsilon(1e-12));
    CHECK(spearman_p(-23.0 / 28.0, 7) == doctest::Approx(0.034126984126984124).epsilon(1e-12));
    CHECK(spearman_p(0.0, 7) <= 1.0);
    CHECK(spearman_p(1.0, 4) == doctest::Approx(2.0 / 24.0));
  }

  TEST_CASE("log placement gives constant normalised precision") {
    const std::vector<double> mags{1, 2, 3, 5, 8, 10, 20, 50, 100, 300, 1000};
    const auto c = analyze_precision(placed(mags, ln), 0);
    REQUIRE(c.points.size() == mags.size() - 1);
    for (const auto& p : c.points) CHECK(p.normalised == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(c.gamma_normalised) < 1e-9);
    CHECK(c.exact_p);
  }

  TEST_CASE("geometric spacing on a log code gives flat raw precision") {
    const std::vector<double> mags{1, 2, 4, 8, 16, 32};
    const auto c = analyze_precision(placed(mags, ln), 0);
    CHECK(c.gradient_rho == 0.0);
    CHECK(c.gradient_p == 1.0);
    CHECK(std::abs(c.gamma) < 1e-9);
  }

  TEST_CASE("linear code on geometric spacing: precision falls with magnitude") {
    const std::vector<double> mags{1, 2, 4, 8, 16, 32, 64};
    const auto c = analyze_precision(placed(mags, ident), 0);
    CHECK(c.gradient_rho == doctest::Approx(-1.0));
    // six gaps: both extreme orderings out of 6!
    CHECK(c.gradient_p == doctest::Approx(2.0 / 720.0));
    CHECK(c.gamma == doctest::Approx(1.0));
    CHECK(c.negative_significant());
  }

  TEST_CASE("uniform scaling leaves the gradient and gamma alone") {
    const std::vector<double> mags{1, 2, 3, 5, 8, 13, 21, 34};
    auto c = placed(mags, std::sqrt);
    const auto before = analyze_precision(c, 0);
    for (auto& v : c.data) v *= 3.5;
    const auto after = analyze_precision(c, 0);
    for (std::size_t i = 0; i < before.points.size(); ++i)
      CHECK(after.points[i].raw == doctest::Approx(before.points[i].raw / 3.5));
    CHECK(after.gradient_rho == before.gradient_rho);
    CHECK(after.gradient_p == before.gradient_p);
    CHECK(after.gamma == doctest::Approx(before.gamma).epsilon(1e-12));
  }

  TEST_CASE("coincident centroids are excluded") {
    const std::vector<double> mags{1, 2, 3, 4, 5};
    auto c = placed(mags, ident);
    c.row(0, 2)[0] = c.row(0, 1)[0];
    const auto curve = analyze_precision(c, 0);
    CHECK(curve.excluded == 1);
    CHECK(curve.points[1].excluded);
  }

  TEST_CASE("H3 layer and domain counts") {
    PrecisionCurve good, bad;
    good.gradient_rho = -0.9;
    good.gradient_p = 0.001;
    bad.gradient_rho = -0.1;
    bad.gradient_p = 0.6;
    std::vector<PrecisionCurve> a(24, good), b(24, bad), c(24, bad);
    for (int i = 0; i < 17; ++i) c[static_cast<std::size_t>(i)] = good;
    const std::vector<std::vector<PrecisionCurve>> doms{a, b, c};
    const auto r = evaluate_h3(doms, 24);
    CHECK(r.domains_passing == 2);
    CHECK(r.pass);
    CHECK(r.domains[2].passing == 17);
    CHECK_THROWS_AS(evaluate_h3(doms, 25), Error);
  }
}
