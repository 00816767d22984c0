#pragma once

#include <stdexcept>
#include <string>

namespace relhop {

/// Malformed or inconsistent input: dimension mismatch, bad index, invalid
/// configuration value. The CLI maps it to exit status 1.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A request outside the domain where the quantity is defined, e.g. asking
/// for ergodic-phase fluctuations at or above the critical point.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace relhop
