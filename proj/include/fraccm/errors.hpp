#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fraccm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (poles, t = 0 for
/// singular kernels, alpha = 1 for the Wright density, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Result magnitude exceeds the double range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A series, asymptotic expansion or quadrature could not certify its
/// accuracy target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Inputs of mismatched order, grid or regime.
class MismatchError : public Error {
 public:
  using Error::Error;
};

/// Configuration parse or validation failure. Carries every violation found,
/// not only the first one.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fraccm
