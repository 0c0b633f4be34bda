#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcdrs {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stepsize or relaxation parameter outside the admissible region.
class StepsizeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The iterate violates the prox optimality identity of the smooth term.
class InconsistentStateError : public Error {
 public:
  using Error::Error;
};

/// The envelope failed to decrease by the guaranteed amount. Almost always an
/// inaccurate or non-global prox oracle.
class DescentViolation : public Error {
 public:
  DescentViolation(int iteration, double deficit);
  int iteration() const noexcept { return iteration_; }
  double deficit() const noexcept { return deficit_; }

 private:
  int iteration_;
  double deficit_;
};

/// Two algebraically equivalent iterations drifted apart.
class EquivalenceError : public Error {
 public:
  EquivalenceError(int iteration, double deviation);
  int iteration() const noexcept { return iteration_; }
  double deviation() const noexcept { return deviation_; }

 private:
  int iteration_;
  double deviation_;
};

/// Failure inside one scenario subproblem, tagged with the scenario index.
class ScenarioError : public Error {
 public:
  ScenarioError(std::size_t scenario, const std::string& what);
  std::size_t scenario() const noexcept { return scenario_; }

 private:
  std::size_t scenario_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcdrs
