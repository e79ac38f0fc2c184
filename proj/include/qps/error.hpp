#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qps {

enum class ErrorKind {
  InvalidArgument,
  DecayViolation,
  ConstantPotential,
  AsymmetricCoefficients,
  BoxTooLarge,
  BoxTooSmall,
  ConvergenceFailure,
  SingularShift,
  PreconditionViolated,
  NoSeparation,
  NotSimple,
  BoundViolated,
  NoEigenvalueInWindow,
  NotSimpleAtNewScale,
  IrrationalFrequency,
  EmptyFamily,
  MaskEmpty,
  ResolutionTooCoarse,
  ConfigInvalid,
  UnknownKind,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as qps::Error. `nearby` carries diagnostic
// eigenvalues for the spectral-window failures of the continuation step.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<double> nearby = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        nearby_(std::move(nearby)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<double>& nearby() const noexcept { return nearby_; }

 private:
  ErrorKind kind_;
  std::vector<double> nearby_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DecayViolation: return "DecayViolation";
    case ErrorKind::ConstantPotential: return "ConstantPotential";
    case ErrorKind::AsymmetricCoefficients: return "AsymmetricCoefficients";
    case ErrorKind::BoxTooLarge: return "BoxTooLarge";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::SingularShift: return "SingularShift";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NoSeparation: return "NoSeparation";
    case ErrorKind::NotSimple: return "NotSimple";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::NoEigenvalueInWindow: return "NoEigenvalueInWindow";
    case ErrorKind::NotSimpleAtNewScale: return "NotSimpleAtNewScale";
    case ErrorKind::IrrationalFrequency: return "IrrationalFrequency";
    case ErrorKind::EmptyFamily: return "EmptyFamily";
    case ErrorKind::MaskEmpty: return "MaskEmpty";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::UnknownKind: return "UnknownKind";
  }
  return "Unknown";
}

}  // namespace qps
