#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fjgame {

enum class ErrorKind {
  // Input problems (CLI exit code 2).
  InvalidArgument,
  InvalidGraph,
  DimensionMismatch,
  ParseError,
  SharedAlphaRequired,
  SingularSusceptibility,
  EmptySample,
  TooLarge,
  SizeConditionViolated,
  // Numerical failures (CLI exit code 3).
  NonSymmetricInput,
  NoConvergence,
  SingularSystem,
  DegenerateBaseline,
  NoNashEquilibrium,
  GradientMismatch,
  DegenerateCoefficient,
  RankDeficientActiveSet,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SharedAlphaRequired: return "SharedAlphaRequired";
    case ErrorKind::SingularSusceptibility: return "SingularSusceptibility";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::SizeConditionViolated: return "SizeConditionViolated";
    case ErrorKind::NonSymmetricInput: return "NonSymmetricInput";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorKind::NoNashEquilibrium: return "NoNashEquilibrium";
    case ErrorKind::GradientMismatch: return "GradientMismatch";
    case ErrorKind::DegenerateCoefficient: return "DegenerateCoefficient";
    case ErrorKind::RankDeficientActiveSet: return "RankDeficientActiveSet";
  }
  return "Unknown";
}

/// True for errors caused by bad input rather than numerical breakdown.
constexpr bool is_input_error(ErrorKind kind) {
  return kind < ErrorKind::NonSymmetricInput;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace detail
}  // namespace fjgame
