#pragma once

#include <stdexcept>
#include <string>

namespace chirp {

// Raised for any violation of a domain precondition: parameter ranges,
// malformed series, degenerate designs. The CLI maps it to exit status 1.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// X^T X of a design is too ill-conditioned to profile out amplitudes.
class DegenerateDesignError : public DomainError {
 public:
  explicit DegenerateDesignError(const std::string& what) : DomainError(what) {}
};

// An estimated frequency or rate left (0, pi).
class RangeError : public DomainError {
 public:
  explicit RangeError(const std::string& what) : DomainError(what) {}
};

// The objective was non-finite on the initial simplex.
class ObjectiveError : public DomainError {
 public:
  explicit ObjectiveError(const std::string& what) : DomainError(what) {}
};

}  // namespace chirp
