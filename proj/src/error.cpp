#include "membrane/error.hpp"

namespace membrane {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonparabolicCoefficient: return "NonparabolicCoefficient";
    case ErrorCode::DegenerateWentzell: return "DegenerateWentzell";
    case ErrorCode::AtomOnMembrane: return "AtomOnMembrane";
    case ErrorCode::TimeOrder: return "TimeOrder";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorCode::SingularIntegrand: return "SingularIntegrand";
    case ErrorCode::SeriesDivergence: return "SeriesDivergence";
    case ErrorCode::MeasureNotNull: return "MeasureNotNull";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

void require_time_order(double s, double t, const char* where) {
  if (!(s < t)) {
    throw Error(ErrorCode::TimeOrder,
                std::string(where) + " requires s < t (s=" + std::to_string(s) +
                    ", t=" + std::to_string(t) + ")");
  }
}

}  // namespace membrane
