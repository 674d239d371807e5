#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace weber::corpus {

inline constexpr int kMaxValue = 1000;

struct MagnitudeHistogram {
  std::array<std::uint64_t, kMaxValue + 1> counts{};  // index 0 unused
  std::uint64_t total_mentions = 0;
  std::uint64_t docs_scanned = 0;
  std::uint64_t malformed_bytes = 0;

  void add(const MagnitudeHistogram& other);
  bool operator==(const MagnitudeHistogram&) const = default;
};

// Streaming byte-level scanner. A mention is a maximal run of ASCII digits
// with no leading zero whose value lies in 1..1000, not preceded by a sign,
// a letter or a '.', not joined to further digits by '.' or ',', and not
// followed by a letter. Chunks may split the input anywhere.
class IntegerScanner {
 public:
  void feed(std::string_view chunk);
  // Closes the current document.
  void finish_document();
  const MagnitudeHistogram& histogram() const { return hist_; }

 private:
  enum class State { outside, number, after_separator };

  void step(unsigned char c);
  void close_number(bool accept);
  void track_utf8(unsigned char c);

  MagnitudeHistogram hist_;
  State state_ = State::outside;
  unsigned char prev_ = ' ';
  int value_ = 0;
  int digits_ = 0;
  bool rejected_ = false;
  bool leading_zero_ = false;
  int utf8_pending_ = 0;
};

MagnitudeHistogram extract_integer_counts(std::string_view text);

// Reads a file (plain or gzip) or every regular file under a directory, one
// document per file, in sorted path order.
MagnitudeHistogram extract_from_path(const std::filesystem::path& path);

enum class Family { power, exponential };
std::string_view to_string(Family f);

struct DistributionFit {
  double alpha = 0.0;
  double power_intercept = 0.0;
  double lambda = 0.0;
  double exp_intercept = 0.0;
  double aic_power = 0.0;
  double aic_exp = 0.0;
  Family winner = Family::power;
  double benford_max_dev_pp = 0.0;
  std::array<double, 9> leading_digit_share{};
  std::size_t support = 0;
  std::size_t zero_cells = 0;
  double mle_alpha = 0.0;
};

DistributionFit fit_magnitude_distribution(const MagnitudeHistogram& h);

// Largest absolute gap, in percentage points, between observed leading-digit
// shares and log10(1 + 1/d).
double benford_max_deviation_pp(std::span<const double, 9> digit_counts);
std::array<double, 9> leading_digit_counts(const MagnitudeHistogram& h);

// Discrete power law on 1..1000 fitted by maximum likelihood.
double truncated_zeta_mle(const MagnitudeHistogram& h);

nlohmann::json to_json(const MagnitudeHistogram& h);
nlohmann::json to_json(const DistributionFit& f);

}  // namespace weber::corpus
