#pragma once

#include <stdexcept>
#include <string>

namespace polaron {

/// Error categories; the numeric values double as CLI exit codes.
enum class ErrorKind : int {
  validation = 1,
  numeric = 2,
  violation = 3,
  internal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual = 0.0)
      : Error(ErrorKind::numeric, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace polaron
