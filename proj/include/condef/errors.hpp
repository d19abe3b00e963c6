#pragma once

#include <stdexcept>
#include <string>

namespace condef {

// Base class for every failure the library reports deliberately.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EventNotReached : SolverError {
  using SolverError::SolverError;
};
struct NonMonotone : SolverError {
  using SolverError::SolverError;
};
struct DomainError : SolverError {
  using SolverError::SolverError;
};
struct OrderTooLow : SolverError {
  using SolverError::SolverError;
};
struct RootIsolationFailure : SolverError {
  using SolverError::SolverError;
};
struct GridTooCoarse : SolverError {
  using SolverError::SolverError;
};
struct NoBracket : SolverError {
  using SolverError::SolverError;
};
struct Blowup : SolverError {
  using SolverError::SolverError;
};
struct NewtonDiverged : SolverError {
  using SolverError::SolverError;
};
struct SingularJacobian : SolverError {
  using SolverError::SolverError;
};
struct ContinuationStall : SolverError {
  double last_good = 0.0;
  ContinuationStall(const std::string& what, double last) : SolverError(what), last_good(last) {}
};
struct BranchCrossing : SolverError {
  using SolverError::SolverError;
};
struct FitAmbiguous : SolverError {
  using SolverError::SolverError;
};
struct ShapeMismatch : SolverError {
  using SolverError::SolverError;
};
struct InsufficientFamily : SolverError {
  using SolverError::SolverError;
};
struct ConfigInvalid : SolverError {
  using SolverError::SolverError;
};

}  // namespace condef
