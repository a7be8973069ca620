#pragma once
#include <stdexcept>
#include <string>

namespace infsep {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Closed form evaluated outside its root regime.
struct BranchError : Error {
  using Error::Error;
};

// Arc length incompatible with the exponent.
struct PeriodError : Error {
  using Error::Error;
};

// Exponent in a regime the requested method does not cover.
struct CaseError : Error {
  using Error::Error;
};

struct SchemeError : Error {
  using Error::Error;
};

struct BracketError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double lastResidual, int stage)
      : Error(what), lastResidual(lastResidual), stage(stage) {}
  double lastResidual;
  int stage;
};

}  // namespace infsep
