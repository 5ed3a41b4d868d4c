#include "mblab/error.hpp"

namespace mblab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSector: return "InvalidSector";
    case ErrorCode::NotInSector: return "NotInSector";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DivisionByZeroDetuning: return "DivisionByZeroDetuning";
    case ErrorCode::NegativeAmplitude: return "NegativeAmplitude";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InsufficientStatistics: return "InsufficientStatistics";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TargetEnergyUnreachable: return "TargetEnergyUnreachable";
    case ErrorCode::PropagationFailure: return "PropagationFailure";
    case ErrorCode::AllShotsRejected: return "AllShotsRejected";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::LogDomainError: return "LogDomainError";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::VectorsRequired: return "VectorsRequired";
    case ErrorCode::SubsetTooSmall: return "SubsetTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, std::optional<double> value)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), value_(value) {}

void fail(ErrorCode code, const std::string& what, std::optional<double> value) {
  throw Error(code, what, value);
}

}  // namespace mblab
