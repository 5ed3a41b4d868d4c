#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mblab {

enum class ErrorCode {
  InvalidSector,
  NotInSector,
  IndexOutOfRange,
  DivisionByZeroDetuning,
  NegativeAmplitude,
  ShapeMismatch,
  ConvergenceFailure,
  DegenerateSpectrum,
  DimensionTooLarge,
  InsufficientStatistics,
  EmptyInput,
  TargetEnergyUnreachable,
  PropagationFailure,
  AllShotsRejected,
  GridMismatch,
  LogDomainError,
  NoCrossing,
  VectorsRequired,
  SubsetTooSmall,
  InvalidArgument,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library. `value()` carries the numeric payload
// some errors report (residual, best gap, offending count).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<double> value = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::optional<double> value_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what,
                       std::optional<double> value = std::nullopt);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace mblab
