#pragma once

#include <stdexcept>
#include <string>

namespace dpower {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

/// Antiderivative requested for a term u^-1 (would need a log).
class ExponentMinusOne : public Error {
public:
  using Error::Error;
};

/// Sign analysis found a supremum too close to zero to call.
class IndeterminateSign : public Error {
public:
  IndeterminateSign(const std::string& what, double sup)
      : Error(what), sup_value(sup) {}
  double sup_value;
};

/// A condition was evaluated at (or numerically at) its threshold.
class IndeterminateNearThreshold : public Error {
public:
  using Error::Error;
};

/// Two routes for the same condition disagree. Always an implementation bug.
class EquivalenceViolation : public Error {
public:
  using Error::Error;
};

class NoExistence : public Error {
public:
  NoExistence(const std::string& what, double omega_crit)
      : Error(what), omega_crit(omega_crit) {}
  double omega_crit;
};

class BracketNotFound : public Error {
public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
public:
  using Error::Error;
};

class NonFiniteState : public Error {
public:
  using Error::Error;
};

class InsufficientTail : public Error {
public:
  using Error::Error;
};

}  // namespace dpower
