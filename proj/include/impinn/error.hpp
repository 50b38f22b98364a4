#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace impinn {

enum class ErrorKind {
  Config,
  Parse,
  Validation,
  NonFiniteLoss,
  NonFiniteGradient,
  NonFinite,
  Divergence,
  DegenerateTriangle,
  CgNoConvergence,
  ZeroReference,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::CgNoConvergence: return "CgNoConvergence";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace impinn
