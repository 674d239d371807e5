#pragma once

#include <stdexcept>
#include <string>

namespace weber {

enum class Errc {
  invalid_argument,
  io,
  bad_magic,
  shape_mismatch,
  non_finite,
  malformed_manifest,
  malformed_record,
  not_normalisable,
  empty_input,
  zero_norm,
  zero_variance,
  collinear,
  singular,
  missing_layer,
  unsupported_combination,
  rank_deficient,
  non_convergence,
  insufficient_data,
  checksum_mismatch,
};

inline const char* errc_name(Errc code);

// All recoverable failures in the library are reported through this type so
// callers (CLI, Python) can map the code to an exit status or exception class.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::non_finite: return "non_finite";
    case Errc::malformed_manifest: return "malformed_manifest";
    case Errc::malformed_record: return "malformed_record";
    case Errc::not_normalisable: return "not_normalisable";
    case Errc::empty_input: return "empty_input";
    case Errc::zero_norm: return "zero_norm";
    case Errc::zero_variance: return "zero_variance";
    case Errc::collinear: return "collinear";
    case Errc::singular: return "singular";
    case Errc::missing_layer: return "missing_layer";
    case Errc::unsupported_combination: return "unsupported_combination";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::non_convergence: return "non_convergence";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::checksum_mismatch: return "checksum_mismatch";
  }
  return "unknown";
}

}  // namespace weber
