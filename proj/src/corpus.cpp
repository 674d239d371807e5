#include "weber/corpus.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <zlib.h>

#include "weber/error.hpp"
#include "weber/optimize.hpp"
#include "weber/stats.hpp"

namespace weber::corpus {

using nlohmann::json;

namespace {

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_word(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

}  // namespace

void MagnitudeHistogram::add(const MagnitudeHistogram& o) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  total_mentions += o.total_mentions;
  docs_scanned += o.docs_scanned;
  malformed_bytes += o.malformed_bytes;
}

void IntegerScanner::track_utf8(unsigned char c) {
  if (utf8_pending_ > 0) {
    if ((c & 0xC0) == 0x80) {
      --utf8_pending_;
      return;
    }
    ++hist_.malformed_bytes;
    utf8_pending_ = 0;
  }
  if (c < 0x80) return;
  if (c >= 0xC2 && c <= 0xDF) utf8_pending_ = 1;
  else if (c >= 0xE0 && c <= 0xEF) utf8_pending_ = 2;
  else if (c >= 0xF0 && c <= 0xF4) utf8_pending_ = 3;
  else ++hist_.malformed_bytes;
}

void IntegerScanner::close_number(bool accept) {
  if (accept && !rejected_ && !leading_zero_ && digits_ <= 4 && value_ >= 1 && value_ <= kMaxValue) {
    ++hist_.counts[static_cast<std::size_t>(value_)];
    ++hist_.total_mentions;
  }
  value_ = 0;
  digits_ = 0;
  rejected_ = false;
  leading_zero_ = false;
  state_ = State::outside;
}

void IntegerScanner::step(unsigned char c) {
  track_utf8(c);
  switch (state_) {
    case State::number:
      if (is_digit(c)) {
        if (digits_ < 5) value_ = value_ * 10 + (c - '0');
        ++digits_;
        break;
      }
      if (c == '.' || c == ',') {
        state_ = State::after_separator;
        break;
      }
      close_number(!is_word(c));
      break;
    case State::after_separator:
      if (is_digit(c)) {
        // decimal or grouped number: drop both sides
        close_number(false);
        state_ = State::number;
        rejected_ = true;
        value_ = c - '0';
        digits_ = 1;
        break;
      }
      close_number(true);
      break;
    case State::outside:
      break;
  }
  if (state_ == State::outside && is_digit(c)) {
    state_ = State::number;
    value_ = c - '0';
    digits_ = 1;
    leading_zero_ = c == '0';
    rejected_ = is_word(prev_) || prev_ == '-' || prev_ == '+' || prev_ == '.' || prev_ == ',';
  }
  prev_ = c;
}

void IntegerScanner::feed(std::string_view chunk) {
  for (char ch : chunk) step(static_cast<unsigned char>(ch));
}

void IntegerScanner::finish_document() {
  if (state_ == State::number || state_ == State::after_separator) close_number(true);
  if (utf8_pending_ > 0) ++hist_.malformed_bytes;
  utf8_pending_ = 0;
  prev_ = ' ';
  ++hist_.docs_scanned;
}

MagnitudeHistogram extract_integer_counts(std::string_view text) {
  IntegerScanner s;
  s.feed(text);
  s.finish_document();
  return s.histogram();
}

namespace {

void scan_file(IntegerScanner& scanner, const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<char> buf(1 << 16);
  for (;;) {
    const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      int code = 0;
      const std::string msg = gzerror(f, &code);
      gzclose(f);
      throw Error(Errc::io, fmt::format("read error in {}: {}", path.string(), msg));
    }
    if (got == 0) break;
    scanner.feed(std::string_view(buf.data(), static_cast<std::size_t>(got)));
  }
  gzclose(f);
  scanner.finish_document();
}

}  // namespace

MagnitudeHistogram extract_from_path(const std::filesystem::path& path) {
  IntegerScanner scanner;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) scan_file(scanner, f);
  } else {
    scan_file(scanner, path);
  }
  return scanner.histogram();
}

std::string_view to_string(Family f) { return f == Family::power ? "power_law" : "exponential"; }

std::array<double, 9> leading_digit_counts(const MagnitudeHistogram& h) {
  std::array<double, 9> d{};
  for (int n = 1; n <= kMaxValue; ++n) {
    int lead = n;
    while (lead >= 10) lead /= 10;
    d[static_cast<std::size_t>(lead - 1)] += static_cast<double>(h.counts[static_cast<std::size_t>(n)]);
  }
  return d;
}

double benford_max_deviation_pp(std::span<const double, 9> digit_counts) {
  double total = 0.0;
  for (double c : digit_counts) total += c;
  if (!(total > 0.0)) throw Error(Errc::insufficient_data, "no leading digits to compare");
  double worst = 0.0;
  for (int d = 1; d <= 9; ++d) {
    const double expected = std::log10(1.0 + 1.0 / d);
    worst = std::max(worst, std::abs(digit_counts[static_cast<std::size_t>(d - 1)] / total - expected));
  }
  return 100.0 * worst;
}

double truncated_zeta_mle(const MagnitudeHistogram& h) {
  double n_total = 0.0, sum_log = 0.0;
  for (int n = 1; n <= kMaxValue; ++n) {
    const double c = static_cast<double>(h.counts[static_cast<std::size_t>(n)]);
    n_total += c;
    sum_log += c * std::log(n);
  }
  if (!(n_total > 0.0)) throw Error(Errc::insufficient_data, "empty histogram");
  auto nll = [&](double a) {
    double z = 0.0;
    for (int n = 1; n <= kMaxValue; ++n) z += std::pow(n, -a);
    return a * sum_log + n_total * std::log(z);
  };
  return optimize::golden_section(nll, 0.0, 6.0, 1e-9);
}

DistributionFit fit_magnitude_distribution(const MagnitudeHistogram& h) {
  std::vector<double> n, logn, logf;
  DistributionFit f;
  for (int v = 1; v <= kMaxValue; ++v) {
    const auto c = h.counts[static_cast<std::size_t>(v)];
    if (c == 0) {
      ++f.zero_cells;
      continue;
    }
    n.push_back(v);
    logn.push_back(std::log(v));
    logf.push_back(std::log(static_cast<double>(c)));
  }
  f.support = n.size();
  if (h.total_mentions < 100 || f.support < 10) {
    throw Error(Errc::insufficient_data,
                fmt::format("need >= 100 mentions over >= 10 values (have {} over {})", h.total_mentions, f.support));
  }
  const auto pw = stats::fit_line(logn, logf);
  const auto ex = stats::fit_line(n, logf);
  f.alpha = -pw.slope;
  f.power_intercept = pw.intercept;
  f.lambda = -ex.slope;
  f.exp_intercept = ex.intercept;
  const double m = static_cast<double>(f.support);
  f.aic_power = m * std::log(std::max(pw.rss / m, 1e-300)) + 6.0;
  f.aic_exp = m * std::log(std::max(ex.rss / m, 1e-300)) + 6.0;
  f.winner = f.aic_exp < f.aic_power ? Family::exponential : Family::power;
  const auto digits = leading_digit_counts(h);
  double total = 0.0;
  for (double d : digits) total += d;
  for (std::size_t i = 0; i < 9; ++i) f.leading_digit_share[i] = digits[i] / total;
  f.benford_max_dev_pp = benford_max_deviation_pp(digits);
  f.mle_alpha = truncated_zeta_mle(h);
  return f;
}

json to_json(const MagnitudeHistogram& h) {
  return {{"counts", std::vector<std::uint64_t>(h.counts.begin() + 1, h.counts.end())},
          {"total_mentions", h.total_mentions},
          {"docs_scanned", h.docs_scanned},
          {"malformed_bytes", h.malformed_bytes}};
}

json to_json(const DistributionFit& f) {
  return {{"alpha", f.alpha},
          {"power_intercept", f.power_intercept},
          {"lambda", f.lambda},
          {"exp_intercept", f.exp_intercept},
          {"aic_power", f.aic_power},
          {"aic_exp", f.aic_exp},
          {"delta_aic", f.aic_exp - f.aic_power},
          {"winner", to_string(f.winner)},
          {"benford_max_dev_pp", f.benford_max_dev_pp},
          {"leading_digit_share", f.leading_digit_share},
          {"support", f.support},
          {"zero_cells", f.zero_cells},
          {"mle_alpha", f.mle_alpha},
          {"token_rule", "ascii digit runs, no sign, no leading zero, no decimal or digit grouping, no letter adjacency"}};
}

}  // namespace weber::corpus
