#pragma once

#include <stdexcept>
#include <string>

namespace tacnode {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A result would overflow the double exponent range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared during evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside the supported numerical envelope.
class EnvelopeError : public Error {
 public:
  using Error::Error;
};

/// I - K is numerically singular (relative pivot below threshold).
class SingularOperatorError : public Error {
 public:
  using Error::Error;
};

/// Two integration contours come closer than the collision tolerance.
class ContourCollisionError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampler ran out of proposals.
class AcceptanceError : public Error {
 public:
  AcceptanceError(const std::string& what, double rate)
      : Error(what), acceptance_rate_(rate) {}
  double acceptance_rate() const noexcept { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

}  // namespace tacnode
