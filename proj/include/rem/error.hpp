// error.hpp
// Exception hierarchy shared by all modules. Each class maps onto one CLI exit code.
#pragma once

#include <stdexcept>
#include <string>

namespace rem {

enum class ErrorKind {
  InvalidConfig = 2,
  BudgetExceeded = 3,
  Violation = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Parameters or inputs outside their admissible range.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::InvalidConfig, what) {}
};

/// A size budget (memory, pairs, jumps, dense solve) would be exceeded.
class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& what) : Error(ErrorKind::BudgetExceeded, what) {}
};

/// A checked identity or inequality failed, or a numerical method did not converge.
class ViolationError : public Error {
 public:
  explicit ViolationError(const std::string& what) : Error(ErrorKind::Violation, what) {}
};

}  // namespace rem
