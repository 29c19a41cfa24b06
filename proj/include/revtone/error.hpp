#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revtone {

enum class ErrorKind {
  InvalidParameter,
  RejectedProfile,
  DegenerateTorus,
  OutsideMomentImage,
  OutsideOpenInterval,
  LabelingFailure,
  ResolutionError,
  DegenerateMeasure,
  UnsupportedQuantization,
  SignedMeasure,
  ConfigError,
  NumericalFailure,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::RejectedProfile: return "rejected-profile";
    case ErrorKind::DegenerateTorus: return "degenerate-torus";
    case ErrorKind::OutsideMomentImage: return "outside-moment-image";
    case ErrorKind::OutsideOpenInterval: return "outside-open-interval";
    case ErrorKind::LabelingFailure: return "labeling-failure";
    case ErrorKind::ResolutionError: return "resolution-error";
    case ErrorKind::DegenerateMeasure: return "degenerate-measure";
    case ErrorKind::UnsupportedQuantization: return "unsupported-quantization";
    case ErrorKind::SignedMeasure: return "signed-measure";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace revtone
