#pragma once

#include <stdexcept>
#include <string>

namespace esqpt {

// Invalid input: parameters out of range, points outside the phase space,
// mismatched ranks. Maps to CLI exit code 2.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A numerical procedure failed to produce a trustworthy result (eigensolver
// breakdown, non-converged optimizer where a result is mandatory). Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Operation is well posed but outside what this library implements.
class UnsupportedError : public std::logic_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::logic_error(what) {}
};

// An output file could not be written. Exit code 74.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace esqpt
