#include "weber/activation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "weber/error.hpp"
#include "weber/stats.hpp"

namespace weber {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'W', 'B', 'R', 'A', 'C', 'T', '1', '\0'};
constexpr std::size_t kHeaderSize = 8 + 3 * 4;

std::uint32_t load_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return v;
}

void store_u32(std::string& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "short write to " + path.string());
}

void check_finite(std::span<const float> tensor, std::size_t rows, std::size_t dim) {
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    if (!std::isfinite(tensor[i])) {
      const std::size_t per_layer = rows * dim;
      throw Error(Errc::non_finite, fmt::format("non-finite value at layer {}, stimulus {}, component {}",
                                                i / per_layer, (i % per_layer) / dim, i % dim));
    }
  }
}

}  // namespace

ActivationSet::ActivationSet(std::size_t n_layers, std::size_t n_stimuli, std::size_t dim, std::vector<float> tensor,
                             std::vector<ManifestEntry> manifest, json meta)
    : n_layers_(n_layers),
      n_stimuli_(n_stimuli),
      dim_(dim),
      tensor_(std::move(tensor)),
      manifest_(std::move(manifest)),
      meta_(std::move(meta)) {
  if (tensor_.size() != n_layers_ * n_stimuli_ * dim_) {
    throw Error(Errc::shape_mismatch, fmt::format("tensor holds {} values, header implies {}", tensor_.size(),
                                                  n_layers_ * n_stimuli_ * dim_));
  }
  if (manifest_.size() != n_stimuli_) {
    throw Error(Errc::shape_mismatch,
                fmt::format("manifest lists {} stimuli, tensor has {}", manifest_.size(), n_stimuli_));
  }
  check_finite(tensor_, n_stimuli_, dim_);
  std::set<std::string> ids;
  std::map<std::string, std::size_t> per_form;
  for (const auto& m : manifest_) {
    if (!ids.insert(m.stimulus_id).second) {
      throw Error(Errc::malformed_manifest, "duplicate stimulus_id '" + m.stimulus_id + "'");
    }
    if (!(m.magnitude > 0.0) || !std::isfinite(m.magnitude)) {
      throw Error(Errc::malformed_manifest, "stimulus '" + m.stimulus_id + "' has a non-positive magnitude");
    }
    ++per_form[m.surface_form + "\x1f" + fmt::format("{}", m.magnitude)];
  }
  if (!per_form.empty()) {
    const auto first = per_form.begin()->second;
    for (const auto& [form, count] : per_form) {
      if (count != first) {
        throw Error(Errc::malformed_manifest, "magnitudes do not share a common carrier count");
      }
    }
  }
}

std::string encode_wbract(const WbractBlock& block) {
  if (block.tensor.size() != std::size_t{block.layers} * block.rows * block.dim) {
    throw Error(Errc::shape_mismatch, "wbract tensor size does not match header");
  }
  std::string out(kMagic, 8);
  store_u32(out, block.layers);
  store_u32(out, block.rows);
  store_u32(out, block.dim);
  const std::size_t offset = out.size();
  out.resize(offset + block.tensor.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + offset, block.tensor.data(), block.tensor.size() * 4);
  } else {
    for (std::size_t i = 0; i < block.tensor.size(); ++i) {
      auto bits = __builtin_bswap32(std::bit_cast<std::uint32_t>(block.tensor[i]));
      std::memcpy(out.data() + offset + 4 * i, &bits, 4);
    }
  }
  out += block.manifest.dump();
  return out;
}

WbractBlock decode_wbract(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw Error(Errc::bad_magic, "missing WBRACT1 magic header");
  }
  if (bytes.size() < kHeaderSize) throw Error(Errc::shape_mismatch, "file ends inside the shape header");
  WbractBlock b;
  b.layers = load_u32(bytes.data() + 8);
  b.rows = load_u32(bytes.data() + 12);
  b.dim = load_u32(bytes.data() + 16);
  const std::size_t count = std::size_t{b.layers} * b.rows * b.dim;
  if (bytes.size() < kHeaderSize + count * 4) {
    throw Error(Errc::shape_mismatch, fmt::format("tensor section truncated: need {} bytes, have {}", count * 4,
                                                  bytes.size() - kHeaderSize));
  }
  b.tensor.resize(count);
  std::memcpy(b.tensor.data(), bytes.data() + kHeaderSize, count * 4);
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : b.tensor) v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
  }
  const auto tail = bytes.substr(kHeaderSize + count * 4);
  try {
    b.manifest = json::parse(tail);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_manifest, std::string("manifest is not valid JSON (") + e.what() + ")");
  }
  return b;
}

WbractBlock read_wbract(const std::filesystem::path& path) { return decode_wbract(slurp(path)); }

void write_wbract(const std::filesystem::path& path, const WbractBlock& block) { spill(path, encode_wbract(block)); }

ActivationSet decode_activations(std::string_view bytes) {
  WbractBlock b = decode_wbract(bytes);
  const json& m = b.manifest;
  if (!m.is_object() || !m.contains("stimuli") || !m["stimuli"].is_array()) {
    throw Error(Errc::malformed_manifest, "manifest must be an object with a 'stimuli' array");
  }
  std::vector<ManifestEntry> entries;
  entries.reserve(m["stimuli"].size());
  for (const auto& s : m["stimuli"]) {
    try {
      ManifestEntry e;
      e.stimulus_id = s.at("stimulus_id").get<std::string>();
      e.magnitude = s.at("magnitude").get<double>();
      e.carrier_index = s.at("carrier_index").get<int>();
      e.token_position = s.at("token_position").get<int>();
      e.surface_form = s.at("surface_form").get<std::string>();
      if (s.contains("slot_magnitude")) e.slot_magnitude = s["slot_magnitude"].get<double>();
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(Errc::malformed_manifest, std::string("bad manifest entry: ") + ex.what());
    }
  }
  if (entries.size() != b.rows) {
    throw Error(Errc::shape_mismatch,
                fmt::format("manifest lists {} stimuli, header declares {}", entries.size(), b.rows));
  }
  return ActivationSet(b.layers, b.rows, b.dim, std::move(b.tensor), std::move(entries),
                       m.value("meta", json::object()));
}

std::string encode_activations(const ActivationSet& acts) {
  WbractBlock b;
  b.layers = static_cast<std::uint32_t>(acts.n_layers());
  b.rows = static_cast<std::uint32_t>(acts.n_stimuli());
  b.dim = static_cast<std::uint32_t>(acts.dim());
  b.tensor.assign(acts.tensor().begin(), acts.tensor().end());
  json stimuli = json::array();
  for (const auto& e : acts.manifest()) {
    json s = {{"stimulus_id", e.stimulus_id},
              {"magnitude", e.magnitude},
              {"carrier_index", e.carrier_index},
              {"token_position", e.token_position},
              {"surface_form", e.surface_form}};
    if (e.slot_magnitude) s["slot_magnitude"] = *e.slot_magnitude;
    stimuli.push_back(std::move(s));
  }
  b.manifest = {{"schema", "weber.wbract/1"}, {"kind", "activations"}, {"stimuli", stimuli}, {"meta", acts.meta()}};
  return encode_wbract(b);
}

ActivationSet read_activation_file(const std::filesystem::path& path) { return decode_activations(slurp(path)); }

void write_activation_file(const std::filesystem::path& path, const ActivationSet& acts) {
  spill(path, encode_activations(acts));
}

CentroidSet compute_centroids(const ActivationSet& acts) {
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < acts.n_stimuli(); ++s) groups[acts.manifest()[s].magnitude].push_back(s);
  if (groups.empty()) throw Error(Errc::empty_input, "activation set has no stimuli");
  CentroidSet c;
  c.n_layers = acts.n_layers();
  c.dim = acts.dim();
  for (auto& [mag, members] : groups) {
    // fixed summation order keeps centroids independent of stimulus order
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const auto& ma = acts.manifest()[a];
      const auto& mb = acts.manifest()[b];
      return std::tie(ma.carrier_index, ma.stimulus_id) < std::tie(mb.carrier_index, mb.stimulus_id);
    });
    c.magnitudes.push_back(mag);
    c.carrier_counts.push_back(members.size());
  }
  c.data.assign(c.n_layers * c.magnitudes.size() * c.dim, 0.0);
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    std::size_t m = 0;
    for (const auto& [mag, members] : groups) {
      auto out = c.row(l, m);
      for (std::size_t s : members) {
        const auto in = acts.row(l, s);
        for (std::size_t k = 0; k < c.dim; ++k) out[k] += in[k];
      }
      for (auto& v : out) v /= static_cast<double>(members.size());
      ++m;
    }
  }
  return c;
}

IccResult icc_consistency(std::span<const double> scores, std::size_t n, std::size_t k) {
  if (n < 2 || k < 2) throw Error(Errc::insufficient_data, "ICC needs at least two targets and two raters");
  if (scores.size() != n * k) throw Error(Errc::shape_mismatch, "ICC score matrix has the wrong size");
  const double grand = stats::mean(scores);
  std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      row_mean[i] += scores[i * k + j] / static_cast<double>(k);
      col_mean[j] += scores[i * k + j] / static_cast<double>(n);
    }
  }
  double ss_rows = 0.0, ss_cols = 0.0, ss_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss_rows += static_cast<double>(k) * (row_mean[i] - grand) * (row_mean[i] - grand);
  for (std::size_t j = 0; j < k; ++j) ss_cols += static_cast<double>(n) * (col_mean[j] - grand) * (col_mean[j] - grand);
  for (double v : scores) ss_total += (v - grand) * (v - grand);
  const double ss_err = std::max(0.0, ss_total - ss_rows - ss_cols);
  const double ms_rows = ss_rows / static_cast<double>(n - 1);
  const double ms_err = ss_err / static_cast<double>((n - 1) * (k - 1));
  IccResult r;
  r.n_magnitudes = n;
  r.n_carriers = k;
  const double denom = ms_rows + static_cast<double>(k - 1) * ms_err;
  if (ss_total <= 1e-300 * static_cast<double>(n * k) || denom <= 0.0) {
    r.icc = 1.0;
    r.degenerate = true;
    return r;
  }
  r.icc = (ms_rows - ms_err) / denom;
  return r;
}

IccResult carrier_icc(const ActivationSet& acts, std::size_t layer) {
  if (layer >= acts.n_layers()) throw Error(Errc::missing_layer, fmt::format("layer {} out of range", layer));
  const CentroidSet cents = compute_centroids(acts);
  const std::size_t n = cents.n_magnitudes();
  const std::size_t dim = acts.dim();
  std::set<int> carrier_set;
  for (const auto& e : acts.manifest()) carrier_set.insert(e.carrier_index);
  const std::size_t k = carrier_set.size();
  if (n < 2 || k < 2) throw Error(Errc::insufficient_data, "ICC needs at least two magnitudes and two carriers");

  Eigen::MatrixXd c(n, dim);
  for (std::size_t m = 0; m < n; ++m) {
    const auto r = cents.row(layer, m);
    for (std::size_t d = 0; d < dim; ++d) c(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d)) = r[d];
  }
  const Eigen::RowVectorXd centre = c.colwise().mean();
  c.rowwise() -= centre;
  Eigen::VectorXd axis;
  if (c.squaredNorm() <= 0.0) {
    IccResult r;
    r.icc = 1.0;
    r.degenerate = true;
    r.n_magnitudes = n;
    r.n_carriers = k;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c * c.transpose());
  axis = c.transpose() * eig.eigenvectors().col(static_cast<Eigen::Index>(n) - 1);
  axis.normalize();

  std::vector<int> carriers(carrier_set.begin(), carrier_set.end());
  std::vector<double> scores(n * k, NAN);
  for (std::size_t s = 0; s < acts.n_stimuli(); ++s) {
    const auto& e = acts.manifest()[s];
    const auto m = static_cast<std::size_t>(
        std::lower_bound(cents.magnitudes.begin(), cents.magnitudes.end(), e.magnitude) - cents.magnitudes.begin());
    const auto j = static_cast<std::size_t>(
        std::lower_bound(carriers.begin(), carriers.end(), e.carrier_index) - carriers.begin());
    const auto x = acts.row(layer, s);
    double proj = 0.0;
    for (std::size_t d = 0; d < dim; ++d) proj += (x[d] - centre(static_cast<Eigen::Index>(d))) * axis(static_cast<Eigen::Index>(d));
    scores[m * k + j] = proj;
  }
  if (std::any_of(scores.begin(), scores.end(), [](double v) { return std::isnan(v); })) {
    throw Error(Errc::shape_mismatch, "every magnitude must appear once under every carrier for ICC");
  }
  return icc_consistency(scores, n, k);
}

AgreementResult tensor_agreement(const ActivationSet& a, const ActivationSet& b) {
  if (a.n_layers() != b.n_layers() || a.n_stimuli() != b.n_stimuli() || a.dim() != b.dim()) {
    throw Error(Errc::shape_mismatch, "activation sets differ in shape");
  }
  for (std::size_t s = 0; s < a.n_stimuli(); ++s) {
    if (a.manifest()[s].stimulus_id != b.manifest()[s].stimulus_id) {
      throw Error(Errc::shape_mismatch, "activation manifests differ at stimulus " + std::to_string(s));
    }
  }
  AgreementResult r;
  r.worst_r = INFINITY;
  for (std::size_t l = 0; l < a.n_layers(); ++l) {
    const auto la = a.layer(l);
    const auto lb = b.layer(l);
    std::vector<double> x(la.begin(), la.end()), y(lb.begin(), lb.end());
    const double rho = stats::pearson(x, y);
    r.per_layer_r.push_back(rho);
    if (rho < r.worst_r) {
      r.worst_r = rho;
      r.worst_layer = l;
    }
  }
  return r;
}

}  // namespace weber
