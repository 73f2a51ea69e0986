#pragma once

#include <stdexcept>
#include <string>

namespace membrane {

enum class ErrorCode {
  InvalidInput = 1,
  NonparabolicCoefficient,
  DegenerateWentzell,
  AtomOnMembrane,
  TimeOrder,
  ConvergenceFailure,
  MeshMismatch,
  MeshTooCoarse,
  SingularIntegrand,
  SeriesDivergence,
  MeasureNotNull,
  StepTooLarge,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }
  // what() without the leading code name
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Throws TimeOrder unless s < t.
void require_time_order(double s, double t, const char* where);

}  // namespace membrane
