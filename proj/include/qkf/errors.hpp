#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qkf {

enum class ErrorCode {
  InvalidRecord,
  ShearSingularity,
  DegeneratePath,
  Parse,
  EmptyDataset,
  Stratification,
  Shape,
  EmptyInput,
  Capacity,
  Spec,
  DegenerateKernel,
  NotTrainable,
  Divergence,
  DegenerateLabels,
  Parameter,
  EmptyEvaluation,
  Config,
  Dependency,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by KTA training when a gradient turns non-finite. Carries the last
// parameter vector that produced a finite step.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> last_good)
      : Error(ErrorCode::Divergence, what), last_good_(std::move(last_good)) {}

  const std::vector<double>& last_good() const noexcept { return last_good_; }

 private:
  std::vector<double> last_good_;
};

}  // namespace qkf
