#pragma once

#include <stdexcept>
#include <string>

namespace parlay_kelly {

/// Malformed or inconsistent input data (bad probabilities, prices, schema).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for failures raised by solvers and enumerators.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The single-event optimum has no positive cash, so the closed form does not apply.
class NoPositiveCashError : public SolverError {
 public:
  explicit NoPositiveCashError(std::string event)
      : SolverError("event '" + event +
                    "' has no positive-cash Kelly optimum (active price mass reaches 1)"),
        event_(std::move(event)) {}

  const std::string& event() const noexcept { return event_; }

 private:
  std::string event_;
};

/// An enumeration (tickets or joint outcomes) would exceed its configured cap.
class MenuTooLargeError : public SolverError {
 public:
  MenuTooLargeError(const std::string& what, double required, double cap)
      : SolverError(what + " requires " + std::to_string(static_cast<long long>(required)) +
                    " entries, cap is " + std::to_string(static_cast<long long>(cap))),
        required_(required) {}

  double required() const noexcept { return required_; }

 private:
  double required_;
};

class NonConvergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Stakes that leave nonpositive wealth in some joint outcome.
class InfeasibleStakesError : public SolverError {
 public:
  using SolverError::SolverError;
};

class OrderEstimationError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A sweep left too few usable records to fit an order.
class SweepError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace parlay_kelly
