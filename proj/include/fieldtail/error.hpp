#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fieldtail {

enum class ErrorCode {
  InvalidArgument,
  PointOutsideDomain,
  NonGaussianSpec,
  NoConvergence,
  GridTooLarge,
  DegenerateMaximum,
  QuadratureNotConverged,
  EffectiveSampleSizeTooSmall,
  NotCentered,
  MgfUnstable,
  RangeExceeded,
  NoCandidatePasses,
  InsufficientScales,
  DegenerateFit,
  ConfigInvalid,
  EmptyDirectory,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// True for errors that mean "the input was wrong" rather than "the numerics
// failed"; the CLI maps these to exit status 2.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace fieldtail
