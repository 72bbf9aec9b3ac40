#include "cavity/errors.hpp"

namespace cavity {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateDeterminant: return "DegenerateDeterminant";
    case ErrorCode::kSingularBranch: return "SingularBranch";
    case ErrorCode::kNotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::kInvalidForBlueDetuning: return "InvalidForBlueDetuning";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kZeroAmplitude: return "ZeroAmplitude";
    case ErrorCode::kNotTrapped: return "NotTrapped";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace cavity
