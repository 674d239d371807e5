#include <doctest.h>

#include <cmath>
#include <string>

#include "weber/corpus.hpp"
#include "weber/error.hpp"
#include "weber/synthetic.hpp"

using namespace weber;
using namespace weber::corpus;

namespace {

std::uint64_t count_of(std::string_view text, int v) { return extract_integer_counts(text).counts[v]; }
std::uint64_t total_of(std::string_view text) { return extract_integer_counts(text).total_mentions; }

MagnitudeHistogram power_histogram(double alpha, double scale) {
  MagnitudeHistogram h;
  for (int n = 1; n <= kMaxValue; ++n) {
    const auto c = static_cast<std::uint64_t>(std::llround(scale * std::pow(n, -alpha)));
    h.counts[n] = c;
    h.total_mentions += c;
  }
  return h;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("tokenisation rules") {
    CHECK(total_of("3.14") == 0);
    CHECK(total_of("1,000") == 0);
    CHECK(total_of("007") == 0);
    CHECK(total_of("abc12") == 0);
    CHECK(total_of("12abc") == 0);
    CHECK(total_of("-5") == 0);
    CHECK(total_of("+5") == 0);
    CHECK(count_of("1000", 1000) == 1);
    CHECK(total_of("1001") == 0);
    CHECK(total_of("0") == 0);
    CHECK(count_of("I saw 12 cats and 7 dogs.", 12) == 1);
    CHECK(count_of("I saw 12 cats and 7 dogs.", 7) == 1);
    CHECK(count_of("It cost 5.", 5) == 1);
    CHECK(count_of("(40)", 40) == 1);
    CHECK(count_of("in 1999 and 2000", 1000) == 0);
    CHECK(total_of("in 1999 and 2000") == 0);
  }

  TEST_CASE("chunk boundaries do not matter") {
    const std::string text = "Roughly 250 people, 3.5 tons, 1,200 cars, 17 boats and 999 birds.\nThen 42.";
    const auto whole = extract_integer_counts(text);
    for (std::size_t cut = 1; cut < text.size(); ++cut) {
      IntegerScanner s;
      s.feed(std::string_view(text).substr(0, cut));
      s.feed(std::string_view(text).substr(cut));
      s.finish_document();
      CHECK(s.histogram().counts == whole.counts);
    }
    CHECK(whole.total_mentions == 4);
  }

  TEST_CASE("exact Benford shares give zero deviation") {
    std::array<double, 9> d{};
    for (int k = 1; k <= 9; ++k) d[k - 1] = 1e6 * std::log10(1.0 + 1.0 / k);
    CHECK(benford_max_deviation_pp(d) == doctest::Approx(0.0).epsilon(1e-9));
    std::array<double, 9> flat{};
    flat.fill(1.0);
    // digit 1: 30.103 - 11.111 percentage points
    CHECK(benford_max_deviation_pp(flat) == doctest::Approx(100.0 * (std::log10(2.0) - 1.0 / 9.0)));
  }

  TEST_CASE("power-law histogram fits") {
    const auto h = power_histogram(0.773, 1e7);
    const auto f = fit_magnitude_distribution(h);
    CHECK(f.alpha == doctest::Approx(0.773).epsilon(1e-3));
    CHECK(f.winner == Family::power);
    CHECK(f.aic_exp - f.aic_power > 10.0);
    CHECK(f.mle_alpha == doctest::Approx(0.773).epsilon(2e-3));
    CHECK(f.support == 1000);
  }

  TEST_CASE("too little data") {
    MagnitudeHistogram h;
    h.counts[3] = 5;
    h.total_mentions = 5;
    CHECK_THROWS_AS(fit_magnitude_distribution(h), Error);
  }

  TEST_CASE("synthetic corpus tally equals extraction") {
    const auto c = synthetic::gen_powerlaw_corpus(0.773, 20000, 4);
    const auto h = extract_integer_counts(c.text);
    CHECK(h.total_mentions == 20000);
    for (int v = 1; v <= kMaxValue; ++v) CHECK(h.counts[v] == c.tally[v]);
  }
}
