#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "weber/causal.hpp"
#include "weber/error.hpp"
#include "weber/synthetic.hpp"

using namespace weber;
using namespace weber::causal;

namespace {

synthetic::SyntheticEmbedding small_log_embedding() {
  synthetic::EmbeddingSpec s;
  s.magnitudes = synthetic::numerical_magnitudes();
  s.dim = 256;
  s.layers = 2;
  s.seed = 3;
  return synthetic::gen_embeddings(s);
}

PatchResult result(std::string dir, double dose, double dp, std::string prompt = "p") {
  PatchResult r;
  r.prompt_id = std::move(prompt);
  r.direction_id = std::move(dir);
  r.dose = dose;
  r.p_base = 0.5;
  r.p_patched = 0.5 + dp;
  r.delta_p = dp;
  return r;
}

}  // namespace

TEST_SUITE("causal") {
  TEST_CASE("ridge probe recovers the planted direction") {
    const auto e = small_log_embedding();
    const auto d = fit_magnitude_direction(e.acts, 1);
    double cos = 0.0;
    for (std::size_t k = 0; k < d.unit_vector.size(); ++k) cos += d.unit_vector[k] * e.direction[k];
    CHECK(std::abs(cos) > 0.95);
    CHECK(d.probe_r2 > 0.9);
    CHECK(d.projection_span > 0.0);
    const auto v = pca_validate(compute_centroids(e.acts), 1, d);
    CHECK(v.pass);
  }

  TEST_CASE("dose monotonicity rule") {
    CHECK(dose_monotonic(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 1));
    CHECK_FALSE(dose_monotonic(std::vector<double>{0.1, 0.2, 0.3, 0.4}, -1));
    CHECK(dose_monotonic(std::vector<double>{-0.1, -0.2, -0.3}, -1));
    // one small dip is tolerated, a large one or two dips are not
    CHECK(dose_monotonic(std::vector<double>{0.0, 0.5, 0.48, 1.0}, 1));
    CHECK_FALSE(dose_monotonic(std::vector<double>{0.0, 0.5, 0.2, 1.0}, 1));
    CHECK_FALSE(dose_monotonic(std::vector<double>{0.0, 0.5, 0.48, 1.0, 0.98}, 1));
  }

  TEST_CASE("plan size and wbract roundtrip") {
    const auto e = small_log_embedding();
    const auto d = fit_magnitude_direction(e.acts, 0);
    std::vector<std::string> ids;
    for (int i = 0; i < 200; ++i) ids.push_back(fmt::format("p{:03d}", i));
    const auto plan = build_patch_plan(d, ids, 17);
    CHECK(plan.n_directions() == 11);
    CHECK(plan.planned_runs() == 8800);
    CHECK(plan.direction_id(0) == "mag");
    CHECK(plan.direction_id(3) == "rand_3");
    for (std::size_t i = 0; i < plan.n_directions(); ++i) {
      double n2 = 0.0;
      for (double v : plan.direction(i)) n2 += v * v;
      CHECK(n2 == doctest::Approx(1.0));
    }
    const auto off = plan.offset(0, 0.5);
    CHECK(off[0] == doctest::Approx(0.5 * d.projection_span * d.unit_vector[0]));

    const auto back = plan_from_wbract(plan_to_wbract(plan));
    CHECK(back.layer == plan.layer);
    CHECK(back.prompt_ids == plan.prompt_ids);
    CHECK(back.doses == plan.doses);
    CHECK(back.seed == 17);
    CHECK(back.mag.projection_span == doctest::Approx(plan.mag.projection_span));
    REQUIRE(back.random.size() == 10);
    CHECK(back.random[4][7] == doctest::Approx(plan.random[4][7]).epsilon(1e-6));
  }

  TEST_CASE("patch analysis") {
    std::vector<PatchResult> r;
    for (double dose : {0.25, 0.5, 0.75, 1.0}) {
      for (int p = 0; p < 4; ++p) {
        r.push_back(result("mag", dose, 0.2 * dose * (p == 3 ? -1 : 1)));
        r.push_back(result("rand_1", dose, 0.01 * (p % 2 ? 1 : -1)));
      }
    }
    const auto a = analyze_patch_results(r);
    CHECK(a.dose == 1.0);
    CHECK(a.mag_mean_abs_dp == doctest::Approx(0.2));
    CHECK(a.rand_mean_abs_dp == doctest::Approx(0.01));
    CHECK(a.specificity == doctest::Approx(20.0));
    CHECK(a.shift_fraction == doctest::Approx(0.75));
    CHECK(a.sign_correct);
    CHECK(a.dose_monotonic);
    CHECK(a.dose_response.size() == 4);
    CHECK_THROWS_AS(analyze_patch_results(std::span(r).first(1)), Error);
  }

  TEST_CASE("H7 threshold and ceiling flag") {
    CHECK(evaluate_h7(0.75).pass);
    CHECK_FALSE(evaluate_h7(0.74).pass);
    CHECK(evaluate_h7(0.8, 0.97).ceiling);
    CHECK_FALSE(evaluate_h7(0.8, 0.9).ceiling);
    std::vector<PatchResult> r{result("mag", 1, 0.1), result("mag", 1, -0.1), result("mag", 1, 0.2),
                               result("mag", 1, 0.3), result("mag", 0.5, -0.3)};
    CHECK(evaluate_h7(r).shift_fraction == doctest::Approx(0.75));
  }
}
