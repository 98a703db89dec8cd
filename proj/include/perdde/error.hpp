#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perdde {

enum class ErrorCode {
  GridTooCoarse,
  DegenerateCertificate,
  SingularMatrix,
  DomainEscape,
  NoConvergence,
  SingularJacobian,
  BlowUp,
  StepMisfit,
  ResonantLinearisation,
  FloquetOne,
  NotOnBoundary,
  WeakConditionFails,
  ParameterViolation,
  ConfigInvalid,
  Precondition,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace perdde
