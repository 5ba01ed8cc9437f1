#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvunmix {

// Base of every error thrown by the library. The CLI maps the two
// families below onto exit codes 2 (input) and 3 (numerical).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

class GridMismatchError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : InputError(line ? what + " (line " + std::to_string(line) + ")" : what), message_(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }
  /// The message without the line suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class IdentifiabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoMinimumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class WarningCode {
  ModelViolation,   // NV0 feature leaked into a difference spectrum
  NegativeExcursion,
  NonPhysical,      // scaling factor f <= 0
  Conditioning,     // t0 and t- too close for a stable inversion
  Flat,             // no unique minimum, tie broken by rule
  ZeroTotal,        // fraction undefined at some pixels
  Clamped,          // loader clamped negative raw values
};

struct Warning {
  WarningCode code;
  std::string message;
};

using Warnings = std::vector<Warning>;

inline const char* to_string(WarningCode code) {
  switch (code) {
    case WarningCode::ModelViolation: return "ModelViolationWarning";
    case WarningCode::NegativeExcursion: return "NegativeExcursionWarning";
    case WarningCode::NonPhysical: return "NonPhysicalWarning";
    case WarningCode::Conditioning: return "ConditioningWarning";
    case WarningCode::Flat: return "FlatWarning";
    case WarningCode::ZeroTotal: return "ZeroTotalWarning";
    case WarningCode::Clamped: return "ClampedWarning";
  }
  return "Warning";
}

inline bool has_warning(const Warnings& warnings, WarningCode code) {
  for (const auto& w : warnings)
    if (w.code == code) return true;
  return false;
}

}  // namespace nvunmix
