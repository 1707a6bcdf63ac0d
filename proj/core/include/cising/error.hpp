#pragma once

#include <stdexcept>
#include <string>

namespace cising {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A state handed to the stability classifier does not zero the Bloch
// right-hand side within the root tolerance.
class NotAFixedPoint : public Error {
 public:
  NotAFixedPoint(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Step-size underflow or exhausted step budget in an ODE integration.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

// Iterative eigensolver failed to converge; carries the worst residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace cising
