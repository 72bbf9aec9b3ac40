#pragma once

#include <stdexcept>
#include <string>

namespace cavity {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateDeterminant,
  kSingularBranch,
  kNotPositiveSemidefinite,
  kInvalidForBlueDetuning,
  kNonFiniteState,
  kZeroAmplitude,
  kNotTrapped,
  kNotConverged,
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cavity
