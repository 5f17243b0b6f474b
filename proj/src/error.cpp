#include "fieldtail/error.hpp"

namespace fieldtail {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::PointOutsideDomain: return "point-outside-domain";
    case ErrorCode::NonGaussianSpec: return "non-gaussian-spec";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::GridTooLarge: return "grid-too-large";
    case ErrorCode::DegenerateMaximum: return "degenerate-maximum";
    case ErrorCode::QuadratureNotConverged: return "quadrature-not-converged";
    case ErrorCode::EffectiveSampleSizeTooSmall: return "effective-sample-size-too-small";
    case ErrorCode::NotCentered: return "not-centered";
    case ErrorCode::MgfUnstable: return "mgf-unstable";
    case ErrorCode::RangeExceeded: return "r-exceeds-range";
    case ErrorCode::NoCandidatePasses: return "no-candidate-passes";
    case ErrorCode::InsufficientScales: return "insufficient-scales";
    case ErrorCode::DegenerateFit: return "degenerate-fit";
    case ErrorCode::ConfigInvalid: return "config-invalid";
    case ErrorCode::EmptyDirectory: return "empty-directory";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

bool is_validation_error(ErrorCode code) {
  return code == ErrorCode::InvalidArgument || code == ErrorCode::ConfigInvalid ||
         code == ErrorCode::PointOutsideDomain || code == ErrorCode::NonGaussianSpec;
}

}  // namespace fieldtail
