#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nldd {

enum class ErrorCode {
  InvalidArgument,
  NonIntegerSubdivision,
  CutOffGrid,
  DisconnectedPath,
  PathNotOnGrid,
  UnsupportedDegree,
  NonConvergence,
  SingularJacobian,
  NewtonDivergence,
  MeshMismatch,
  TooLarge,
  EquivalenceViolation,
  Diverged,
  ConfigError,
  IoError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Residuals in messages: "1.234e-13".
[[nodiscard]] inline std::string format_residual(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Library-wide exception. Every failure carries a machine-readable code so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative solvers; keeps the last residual for diagnostics.
class SolverError : public Error {
 public:
  SolverError(ErrorCode code, const std::string& message, double residual, int iterations)
      : Error(code, message), residual_(residual), iterations_(iterations) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }
  [[nodiscard]] int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonIntegerSubdivision: return "NonIntegerSubdivision";
    case ErrorCode::CutOffGrid: return "CutOffGrid";
    case ErrorCode::DisconnectedPath: return "DisconnectedPath";
    case ErrorCode::PathNotOnGrid: return "PathNotOnGrid";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EquivalenceViolation: return "EquivalenceViolation";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nldd
