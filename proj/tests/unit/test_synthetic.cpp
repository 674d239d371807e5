#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "weber/activation.hpp"
#include "weber/error.hpp"
#include "weber/stimulus.hpp"
#include "weber/synthetic.hpp"

using namespace weber;
using namespace weber::synthetic;

namespace {

EmbeddingSpec small_spec() {
  EmbeddingSpec s;
  s.magnitudes = numerical_magnitudes();
  s.dim = 64;
  s.layers = 3;
  return s;
}

}  // namespace

TEST_SUITE("synthetic") {
  TEST_CASE("embeddings are deterministic") {
    const auto a = gen_embeddings(small_spec());
    const auto b = gen_embeddings(small_spec());
    CHECK(encode_activations(a.acts) == encode_activations(b.acts));
    auto other = small_spec();
    other.seed = 8;
    CHECK(encode_activations(gen_embeddings(other).acts) != encode_activations(a.acts));
  }

  TEST_CASE("embedding shape and manifest") {
    const auto e = gen_embeddings(small_spec());
    CHECK(e.acts.n_layers() == 3);
    CHECK(e.acts.n_stimuli() == 26 * 5);
    CHECK(e.acts.dim() == 64);
    CHECK(e.acts.meta()["geometry"] == "log");
    double n2 = 0.0;
    for (double v : e.direction) n2 += v * v;
    CHECK(n2 == doctest::Approx(1.0));
    CHECK(e.span == doctest::Approx(std::log(1000.0)));
  }

  TEST_CASE("noise-free log embedding places centroids on the log line") {
    auto s = small_spec();
    s.noise_sigma = 0.0;
    s.layers = 1;
    const auto e = gen_embeddings(s);
    const auto c = compute_centroids(e.acts);
    std::vector<double> proj;
    for (std::size_t m = 0; m < c.n_magnitudes(); ++m) {
      double p = 0.0;
      for (std::size_t k = 0; k < c.dim; ++k) p += c.row(0, m)[k] * e.direction[k];
      proj.push_back(p);
    }
    for (std::size_t m = 1; m < proj.size(); ++m) {
      CHECK(proj[m] - proj[0] ==
            doctest::Approx(std::log(c.magnitudes[m]) - std::log(c.magnitudes[0])).epsilon(1e-5));
    }
  }

  TEST_CASE("observer calibration") {
    ObserverSpec o;
    CHECK(observer_p_correct(o, 1.2) == doctest::Approx(0.75));
    CHECK(observer_p_correct(o, 1.0) == doctest::Approx(0.5));
    o.lapse = 0.1;
    CHECK(observer_p_correct(o, 1.2) == doctest::Approx(0.75 - 0.05));
    o.lapse = 0.5;
    CHECK(observer_p_correct(o, 3.0) == doctest::Approx(0.5));
    o.wf = 0.0;
    CHECK_THROWS_AS(observer_p_correct(o, 1.2), Error);
  }

  TEST_CASE("observer trials follow the pair design") {
    const auto pairs = stimulus::build_comparison_pairs(stimulus::Domain::numerical, stimulus::Task::b1_crossformat, 42);
    ObserverSpec o;
    const auto t = gen_observer_trials(pairs, o);
    REQUIRE(t.size() == pairs.size());
    CHECK(t[10].baseline == pairs[10].baseline_nominal);
    CHECK(t[10].ratio == pairs[10].ratio_nominal);
    CHECK(t[10].large_position == pairs[10].large_position);
    std::size_t correct = 0;
    for (const auto& x : t) correct += x.correct;
    CHECK(double(correct) / double(t.size()) > 0.7);
    const auto again = gen_observer_trials(pairs, o);
    CHECK(trials_jsonl(t) == trials_jsonl(again));
  }

  TEST_CASE("power-law corpus") {
    const auto c = gen_powerlaw_corpus(0.773, 5000, 3);
    REQUIRE(c.tally.size() == 1001);
    std::uint64_t total = 0;
    for (auto v : c.tally) total += v;
    CHECK(total == 5000);
    CHECK(c.tally[1] > c.tally[100]);
    const auto empty = gen_powerlaw_corpus(0.773, 0, 3);
    CHECK(empty.text.empty());
  }

  TEST_CASE("readout oracle") {
    const std::vector<double> u{1.0, 0.0};
    const std::vector<std::vector<double>> dirs{{1.0, 0.0}, {0.0, 1.0}};
    const std::vector<std::string> ids{"mag", "rand_1"}, prompts{"a", "b"};
    const std::vector<double> doses{0.5, 1.0}, base{0.0, 0.0};
    const auto r = gen_readout_patch_results(u, dirs, ids, doses, 2.0, prompts, base, {1.0, 0.0});
    REQUIRE(r.size() == 8);
    for (const auto& x : r) {
      CHECK(x.p_base == doctest::Approx(0.5));
      if (x.direction_id == "mag") {
        CHECK(x.p_patched == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * x.dose))));
      } else {
        CHECK(x.delta_p == doctest::Approx(0.0));
      }
    }
  }

  TEST_CASE("shuffled slots are a per-carrier permutation") {
    const auto e = gen_embeddings(small_spec());
    const auto s = with_shuffled_slots(e.acts, 2);
    std::vector<double> per_carrier;
    for (const auto& m : s.manifest()) {
      REQUIRE(m.slot_magnitude);
      if (m.carrier_index == 0) per_carrier.push_back(*m.slot_magnitude);
    }
    std::sort(per_carrier.begin(), per_carrier.end());
    CHECK(per_carrier == numerical_magnitudes());
  }

  TEST_CASE("names") {
    CHECK(parse_geometry("planted") == Geometry::planted_direction);
    CHECK(parse_noise_model("stimulus") == NoiseModel::stimulus);
    CHECK(parse_observer_mode("absdiff") == ObserverMode::absdiff);
    CHECK_THROWS_AS(parse_geometry("cubic"), Error);
  }
}
