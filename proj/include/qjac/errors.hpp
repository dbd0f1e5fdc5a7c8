#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace qjac {

/// Base of all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid user input (exit code 1).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Request outside the mathematical domain of an operation (exit code 2).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// z is not in C0: one of the diagonal blocks M^z_+, M^z_- is numerically singular.
class NotInC0 : public DomainError {
 public:
  NotInC0(std::complex<double> z, double margin, const std::string& what)
      : DomainError(what), z_(z), margin_(margin) {}

  std::complex<double> z() const { return z_; }
  /// Smallest relative singular value found among the two blocks.
  double margin() const { return margin_; }

 private:
  std::complex<double> z_;
  double margin_;
};

/// A numerical procedure failed to reach its tolerance (exit code 3).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Pivoted LU found a pivot below the relative singularity threshold.
class SingularMatrix : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace qjac
