#pragma once

#include <stdexcept>
#include <string>

namespace taulift {

enum class ErrorCode {
  ZeroInverse,
  NonPositiveValuation,
  ParityMismatch,
  WindowExhausted,
  SingularPivot,
  InconsistentData,
  AntisymmetryViolated,
  MixedStatistics,
  UnbalancedCharge,
  NotAdmissible,
  BadNormalization,
  SupportTooLarge,
  UnknownModel,
  BadParams,
  NotAvailable,
  InvalidExponential,
  BadConfig,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::NonPositiveValuation: return "NonPositiveValuation";
    case ErrorCode::ParityMismatch: return "ParityMismatch";
    case ErrorCode::WindowExhausted: return "WindowExhausted";
    case ErrorCode::SingularPivot: return "SingularPivot";
    case ErrorCode::InconsistentData: return "InconsistentData";
    case ErrorCode::AntisymmetryViolated: return "AntisymmetryViolated";
    case ErrorCode::MixedStatistics: return "MixedStatistics";
    case ErrorCode::UnbalancedCharge: return "UnbalancedCharge";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::BadNormalization: return "BadNormalization";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::NotAvailable: return "NotAvailable";
    case ErrorCode::InvalidExponential: return "InvalidExponential";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

class TauliftError : public std::runtime_error {
 public:
  TauliftError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw TauliftError(code, what);
}

}  // namespace taulift
