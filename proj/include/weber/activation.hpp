#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace weber {

struct ManifestEntry {
  std::string stimulus_id;
  double magnitude = 0.0;
  int carrier_index = 0;
  int token_position = 0;
  std::string surface_form;
  // Shuffled-magnitude sets only: the magnitude originally bound to this carrier slot.
  std::optional<double> slot_magnitude;
};

// Hidden states for every (layer, stimulus), row-major [layer][stimulus][dim].
// Immutable once constructed; the constructor enforces the invariants.
class ActivationSet {
 public:
  ActivationSet(std::size_t n_layers, std::size_t n_stimuli, std::size_t dim, std::vector<float> tensor,
                std::vector<ManifestEntry> manifest, nlohmann::json meta = nlohmann::json::object());

  std::size_t n_layers() const { return n_layers_; }
  std::size_t n_stimuli() const { return n_stimuli_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t layer, std::size_t stimulus) const {
    return {tensor_.data() + (layer * n_stimuli_ + stimulus) * dim_, dim_};
  }
  std::span<const float> layer(std::size_t layer) const {
    return {tensor_.data() + layer * n_stimuli_ * dim_, n_stimuli_ * dim_};
  }
  std::span<const float> tensor() const { return tensor_; }
  const std::vector<ManifestEntry>& manifest() const { return manifest_; }
  const nlohmann::json& meta() const { return meta_; }

 private:
  std::size_t n_layers_;
  std::size_t n_stimuli_;
  std::size_t dim_;
  std::vector<float> tensor_;
  std::vector<ManifestEntry> manifest_;
  nlohmann::json meta_;
};

// Raw `.wbract` container: magic "WBRACT1\0", little-endian u32 (layers, rows,
// dim), float32 tensor, then a UTF-8 JSON document running to end of file.
struct WbractBlock {
  std::uint32_t layers = 0;
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  std::vector<float> tensor;
  nlohmann::json manifest;
};

WbractBlock read_wbract(const std::filesystem::path& path);
void write_wbract(const std::filesystem::path& path, const WbractBlock& block);
std::string encode_wbract(const WbractBlock& block);
WbractBlock decode_wbract(std::string_view bytes);

ActivationSet read_activation_file(const std::filesystem::path& path);
void write_activation_file(const std::filesystem::path& path, const ActivationSet& acts);
ActivationSet decode_activations(std::string_view bytes);
std::string encode_activations(const ActivationSet& acts);

struct CentroidSet {
  std::size_t n_layers = 0;
  std::size_t dim = 0;
  std::vector<double> magnitudes;  // ascending
  std::vector<std::size_t> carrier_counts;
  std::vector<double> data;        // [layer][magnitude][dim]

  std::size_t n_magnitudes() const { return magnitudes.size(); }
  std::span<const double> row(std::size_t layer, std::size_t m) const {
    return {data.data() + (layer * magnitudes.size() + m) * dim, dim};
  }
  std::span<double> row(std::size_t layer, std::size_t m) {
    return {data.data() + (layer * magnitudes.size() + m) * dim, dim};
  }
};

CentroidSet compute_centroids(const ActivationSet& acts);

struct IccResult {
  double icc = 0.0;
  bool degenerate = false;
  std::size_t n_magnitudes = 0;
  std::size_t n_carriers = 0;
  std::string scalar = "pc1_projection";
};

// ICC(3,1) over carriers, scoring each stimulus by its projection onto the
// first principal axis of the layer's magnitude centroids.
IccResult carrier_icc(const ActivationSet& acts, std::size_t layer);

// ICC(3,1) of a targets x raters score matrix (row-major).
IccResult icc_consistency(std::span<const double> scores, std::size_t n_targets, std::size_t n_raters);

struct AgreementResult {
  std::vector<double> per_layer_r;
  std::size_t worst_layer = 0;
  double worst_r = 1.0;
};

AgreementResult tensor_agreement(const ActivationSet& a, const ActivationSet& b);

}  // namespace weber
