#include "perdde/error.hpp"

namespace perdde {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::GridTooCoarse: return "grid-too-coarse";
    case ErrorCode::DegenerateCertificate: return "degenerate-certificate";
    case ErrorCode::SingularMatrix: return "singular-matrix";
    case ErrorCode::DomainEscape: return "domain-escape";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::SingularJacobian: return "singular-jacobian";
    case ErrorCode::BlowUp: return "blow-up";
    case ErrorCode::StepMisfit: return "step-misfit";
    case ErrorCode::ResonantLinearisation: return "resonant-linearisation";
    case ErrorCode::FloquetOne: return "floquet-one";
    case ErrorCode::NotOnBoundary: return "not-on-boundary";
    case ErrorCode::WeakConditionFails: return "weak-condition-fails";
    case ErrorCode::ParameterViolation: return "parameter-violation";
    case ErrorCode::ConfigInvalid: return "config-invalid";
    case ErrorCode::Precondition: return "precondition";
  }
  return "unknown";
}

}  // namespace perdde
