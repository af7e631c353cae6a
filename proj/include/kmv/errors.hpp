#pragma once

#include <stdexcept>
#include <string>

namespace kmv {

// Base of every error the library raises. The CLI maps ValidationError to
// exit code 1 and every other kmv::Error to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// phi0 + phi1 * c0 * exp(-lambda * u) <= 0 somewhere on the feasible range.
class NonpositiveDenominator : public ValidationError {
 public:
  explicit NonpositiveDenominator(const std::string& what) : ValidationError("phi0/phi1", what) {}
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class PositionOutOfGrid : public Error {
 public:
  using Error::Error;
};

// A coefficient was evaluated outside its domain (e.g. a negative
// accumulated convolution, which K >= 0 and nonnegative weights rule out).
class DomainError : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

class MassAtBoundary : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class UnequalSupportSizes : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kmv
