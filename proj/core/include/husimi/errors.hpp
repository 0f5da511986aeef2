// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace husimi {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed configuration, invalid grid, bad truncation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure that a caller may want to map to a distinct exit code.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the finite range while being integrated.
class NonFiniteError : public NumericalError {
 public:
  NonFiniteError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Population reached the top of the truncated Fock space.
class LeakageError : public NumericalError {
 public:
  LeakageError(const std::string& what, double fraction)
      : NumericalError(what), fraction_(fraction) {}
  double fraction() const noexcept { return fraction_; }

 private:
  double fraction_;
};

class ZeroNormError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// No first return to the Poincare section within the horizon.
class NoReturnError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AllInvalidError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class FormatErrorKind {
  kMalformedHeader,
  kUnsupportedVersion,
  kChecksumMismatch,
  kDimensionOverflow,
  kIo,
};

class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

}  // namespace husimi
