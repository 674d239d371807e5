#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "weber/activation.hpp"
#include "weber/error.hpp"

using namespace weber;

namespace {

// 2 layers, magnitudes {1, 10} x carriers {0, 1}, dim 3.
ActivationSet tiny() {
  std::vector<ManifestEntry> m{
      {"a0", 1, 0, 3, "1", {}}, {"a1", 1, 1, 4, "1", {}}, {"b0", 10, 0, 3, "10", {}}, {"b1", 10, 1, 4, "10", {}}};
  std::vector<float> t{
      1, 0, 0,  3, 0, 0,  0, 2, 0,  0, 4, 0,   // layer 0
      1, 1, 1,  1, 1, 1,  2, 2, 2,  2, 2, 4};  // layer 1
  return ActivationSet(2, 4, 3, std::move(t), std::move(m), {{"model", "tiny"}});
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::invalid_argument;
}

}  // namespace

TEST_SUITE("activation") {
  TEST_CASE("file roundtrip") {
    const auto a = tiny();
    const auto path = std::filesystem::temp_directory_path() / "weber_unit_roundtrip.wbract";
    write_activation_file(path, a);
    const auto b = read_activation_file(path);
    std::filesystem::remove(path);
    CHECK(b.n_layers() == 2);
    CHECK(b.n_stimuli() == 4);
    CHECK(b.dim() == 3);
    CHECK(std::equal(a.tensor().begin(), a.tensor().end(), b.tensor().begin()));
    CHECK(b.manifest()[3].stimulus_id == "b1");
    CHECK(b.manifest()[3].token_position == 4);
    CHECK(b.meta()["model"] == "tiny");
  }

  TEST_CASE("header layout") {
    const auto bytes = encode_activations(tiny());
    CHECK(bytes.substr(0, 8) == std::string("WBRACT1\0", 8));
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    CHECK(static_cast<unsigned char>(bytes[12]) == 4);
    CHECK(static_cast<unsigned char>(bytes[16]) == 3);
    CHECK(bytes[20 + 24 * 4] == '{');
  }

  TEST_CASE("decode errors") {
    auto bytes = encode_activations(tiny());
    auto bad = bytes;
    bad[0] = 'X';
    CHECK(code_of([&] { (void)decode_activations(bad); }) == Errc::bad_magic);
    CHECK(code_of([&] { (void)decode_activations(bytes.substr(0, 30)); }) == Errc::shape_mismatch);
    auto nan = bytes;
    const float q = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(nan.data() + 20 + 4 * 5, &q, 4);
    CHECK(code_of([&] { (void)decode_activations(nan); }) == Errc::non_finite);
    auto broken = bytes.substr(0, 20 + 24 * 4) + "{\"stimuli\":[{\"stimulus_id\":\"x\"}]}";
    CHECK(code_of([&] { (void)decode_activations(broken); }) == Errc::malformed_manifest);
  }

  TEST_CASE("constructor invariants") {
    std::vector<ManifestEntry> dup{{"x", 1, 0, 0, "1", {}}, {"x", 2, 0, 0, "2", {}}};
    CHECK(code_of([&] { ActivationSet(1, 2, 1, {1, 2}, dup); }) == Errc::malformed_manifest);
    std::vector<ManifestEntry> neg{{"x", -1, 0, 0, "1", {}}};
    CHECK(code_of([&] { ActivationSet(1, 1, 1, {1}, neg); }) == Errc::malformed_manifest);
    std::vector<ManifestEntry> uneven{{"x", 1, 0, 0, "1", {}}, {"y", 1, 1, 0, "1", {}}, {"z", 2, 0, 0, "2", {}}};
    CHECK(code_of([&] { ActivationSet(1, 3, 1, {1, 2, 3}, uneven); }) == Errc::malformed_manifest);
    CHECK(code_of([&] { ActivationSet(1, 1, 2, {1}, neg); }) == Errc::shape_mismatch);
  }

  TEST_CASE("centroids average carriers") {
    const auto c = compute_centroids(tiny());
    REQUIRE(c.n_magnitudes() == 2);
    CHECK(c.magnitudes == std::vector<double>{1, 10});
    CHECK(c.row(0, 0)[0] == doctest::Approx(2.0));
    CHECK(c.row(0, 1)[1] == doctest::Approx(3.0));
    CHECK(c.row(1, 1)[2] == doctest::Approx(3.0));
    CHECK(c.carrier_counts == std::vector<std::size_t>{2, 2});
  }

  TEST_CASE("ICC(3,1) on the Shrout-Fleiss table") {
    const std::vector<double> x{9, 2, 5, 8, 6, 1, 3, 2, 8, 4, 6, 8, 7, 1, 2, 6, 10, 5, 6, 9, 6, 2, 4, 7};
    const auto r = icc_consistency(x, 6, 4);
    CHECK(r.icc == doctest::Approx(0.7148407148407154).epsilon(1e-12));
    CHECK_FALSE(r.degenerate);
  }

  TEST_CASE("carrier ICC near one when carriers agree") {
    const std::size_t n = 6, k = 3, dim = 4;
    std::vector<ManifestEntry> m;
    std::vector<float> t;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        m.push_back({"s" + std::to_string(i) + "_" + std::to_string(j), double(i + 1), int(j), 0,
                     std::to_string(i + 1), {}});
        const float g = std::log(float(i + 1));
        t.insert(t.end(), {g, 2 * g, 0.01f * float(j), 1.0f});
      }
    }
    const ActivationSet a(1, n * k, dim, t, m);
    CHECK(carrier_icc(a, 0).icc > 0.99);
    CHECK(code_of([&] { (void)carrier_icc(a, 1); }) == Errc::missing_layer);
  }

  TEST_CASE("agreement of a set with itself") {
    const auto r = tensor_agreement(tiny(), tiny());
    for (double v : r.per_layer_r) CHECK(v == doctest::Approx(1.0));
  }
}
