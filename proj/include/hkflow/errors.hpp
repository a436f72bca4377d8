#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hkflow {

// Every failure the library reports. Numerical failures map to CLI exit code 2,
// configuration failures to 1.
enum class ErrorKind {
  NonRotation,
  DegenerateJet,
  DegenerateTriangle,
  BoundaryVertex,
  StencilOutOfDomain,
  NonNormalInput,
  IdentityViolation,
  NonClosedSurface,
  OnForbiddenSet,
  StabilityViolation,
  SolveFailure,
  NotBlowingUp,
  InsufficientHistory,
  DegenerateSpacing,
  OriginCollision,
  PointOnCurve,
  DegenerateDerivative,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonRotation: return "NonRotation";
    case ErrorKind::DegenerateJet: return "DegenerateJet";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::BoundaryVertex: return "BoundaryVertex";
    case ErrorKind::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorKind::NonNormalInput: return "NonNormalInput";
    case ErrorKind::IdentityViolation: return "IdentityViolation";
    case ErrorKind::NonClosedSurface: return "NonClosedSurface";
    case ErrorKind::OnForbiddenSet: return "OnForbiddenSet";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::NotBlowingUp: return "NotBlowingUp";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::DegenerateSpacing: return "DegenerateSpacing";
    case ErrorKind::OriginCollision: return "OriginCollision";
    case ErrorKind::PointOnCurve: return "PointOnCurve";
    case ErrorKind::DegenerateDerivative: return "DegenerateDerivative";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace hkflow
