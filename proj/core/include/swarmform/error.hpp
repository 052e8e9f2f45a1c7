#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmform {

// Base of every error raised by the library. The CLI maps subclasses onto
// its exit-code contract (input / numerical / infeasible trial).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition (bad option value, size mismatch).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Formation spec violates its invariants (n < 3, self-loop, disconnected...).
class InvalidFormationError : public Error {
 public:
  using Error::Error;
};

// The null basis N lost more rank than the planar case allows.
class DegenerateFormationError : public Error {
 public:
  using Error::Error;
};

// z-subproblem requested on a formation whose z-coordinates are all equal.
class PlanarFormationError : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraphError : public Error {
 public:
  using Error::Error;
};

// Strict assembly found linearly dependent constraint rows.
class DependentConstraintsError : public Error {
 public:
  DependentConstraintsError(const std::string& what, std::vector<std::size_t> rows)
      : Error(what), rows_(std::move(rows)) {}
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

class NumericalFailureError : public Error {
 public:
  NumericalFailureError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// Recovered gains violate the block structure by more than the tolerance.
class GainQualityError : public Error {
 public:
  using Error::Error;
};

class AssignmentError : public Error {
 public:
  using Error::Error;
};

class SimulationFaultError : public Error {
 public:
  SimulationFaultError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Initial placement could not satisfy the minimum separation.
class InfeasibleDensityError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace swarmform
