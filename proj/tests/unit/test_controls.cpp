#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "weber/controls.hpp"
#include "weber/error.hpp"
#include "weber/rng.hpp"
#include "weber/synthetic.hpp"

using namespace weber;
using namespace weber::controls;

namespace {

double brute_force_min(const std::vector<double>& cost, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cost[i * n + p[i]];
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

synthetic::SyntheticEmbedding unit_embedding(double unit_offset) {
  synthetic::EmbeddingSpec s;
  s.magnitudes = {30, 60, 60, 120, 120, 300, 3600, 3600, 7200};
  s.surface_forms = {"30 seconds", "60 seconds", "1 minute", "120 seconds", "2 minutes",
                     "5 minutes",  "3600 seconds", "1 hour", "2 hours"};
  s.dim = 128;
  s.layers = 1;
  s.carriers = 3;
  s.unit_offset = unit_offset;
  s.seed = 21;
  return synthetic::gen_embeddings(s);
}

}  // namespace

TEST_SUITE("controls") {
  TEST_CASE("Hungarian matches brute force") {
    Rng rng(99);
    for (std::size_t n = 1; n <= 6; ++n) {
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> cost(n * n);
        for (auto& c : cost) c = std::floor(rng.uniform() * 10.0);
        const auto a = hungarian(cost, n);
        double s = 0.0;
        std::vector<bool> used(n, false);
        for (std::size_t i = 0; i < n; ++i) {
          s += cost[i * n + a[i]];
          CHECK_FALSE(used[a[i]]);
          used[a[i]] = true;
        }
        CHECK(s == doctest::Approx(brute_force_min(cost, n)));
      }
    }
  }

  TEST_CASE("frequency matching gate") {
    const std::vector<LogProb> nums{{"1", -3}, {"2", -4}, {"3", -5}, {"4", -6}};
    const std::vector<LogProb> nouns{{"cat", -6.1}, {"dog", -3.2}, {"cow", -4.9}, {"fox", -4.1}};
    const auto m = hungarian_frequency_match(nums, nouns);
    CHECK(m.total_cost == doctest::Approx(0.1 + 0.2 + 0.1 + 0.1));
    CHECK(m.matched_spearman == doctest::Approx(1.0));
    CHECK(m.gate_pass);
    CHECK_THROWS_AS(hungarian_frequency_match(nums, std::span(nouns).first(3)), Error);
  }

  TEST_CASE("shuffled slots: identity survives, context does not") {
    synthetic::EmbeddingSpec s;
    s.magnitudes = synthetic::numerical_magnitudes();
    s.dim = 256;
    s.layers = 1;
    const auto e = synthetic::gen_embeddings(s);
    const auto shuffled = synthetic::with_shuffled_slots(e.acts, 5);
    const auto r = shuffled_magnitude_check(e.acts, shuffled, 0);
    CHECK(r.rho_identity > 0.95);
    CHECK(r.rho_original == doctest::Approx(1.0));
    CHECK(r.rho_context < 0.5);
  }

  TEST_CASE("single-token subset of an exact log RDM") {
    std::vector<double> mags;
    for (int i = 1; i <= 20; ++i) mags.push_back(i * 5.0);
    auto u = geometry::model_distances(mags, geometry::ModelKind::weber);
    const auto rdm = geometry::rdm_from_upper(mags, u, geometry::Metric::euclidean);
    const std::vector<std::size_t> subset{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto s = single_token_control(rdm, subset);
    CHECK(s.delta_r2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.subset_size == 10);
    const std::vector<std::size_t> small{0, 1, 2};
    CHECK_THROWS_AS(single_token_control(rdm, small), Error);
  }

  TEST_CASE("unit boundary classification") {
    const auto u = classify_unit_boundary(0.6, 0.8);
    CHECK(u.form_specific);
    CHECK(u.fallback_trigger);
    CHECK_FALSE(classify_unit_boundary(0.9, 0.8).form_specific);
  }

  TEST_CASE("unit-invariant embedding is not form specific") {
    const auto e = unit_embedding(0.0);
    const auto u = unit_boundary_check(e.acts, 0);
    CHECK(u.equivalent_pairs.size() == 3);
    CHECK(u.equiv_cross_unit_sim == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(u.form_specific);
    CHECK_FALSE(u.fallback_trigger);
  }

  TEST_CASE("unit-keyed embedding is form specific") {
    const auto u = unit_boundary_check(unit_embedding(3.0).acts, 0);
    CHECK(u.form_specific);
    CHECK(u.equiv_cross_unit_sim < u.diff_same_unit_sim);
  }
}
