#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vmsns {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration: bad mesh sizes, out-of-range parameters,
/// malformed scenario files. Carries every problem found, not just the first.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& message)
      : Error(message), messages_{message} {}
  explicit ConfigError(std::vector<std::string> messages)
      : Error(join(messages)), messages_(std::move(messages)) {}

  const std::vector<std::string>& messages() const noexcept { return messages_; }

private:
  static std::string join(const std::vector<std::string>& messages) {
    std::string out;
    for (const auto& m : messages) {
      if (!out.empty()) out += "; ";
      out += m;
    }
    return out;
  }

  std::vector<std::string> messages_;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// Dense operation refused because the problem exceeds the configured cap.
class SizeError : public Error {
public:
  using Error::Error;
};

/// Operator inputs violating a precondition (e.g. an indefinite mass matrix).
class InputError : public Error {
public:
  using Error::Error;
};

/// Linear solve failure; should not happen on valid spaces.
class SolverError : public Error {
public:
  using Error::Error;
};

class NonconvergenceError : public SolverError {
public:
  NonconvergenceError(const std::string& message, double last_increment)
      : SolverError(message), last_increment_(last_increment) {}
  double last_increment() const noexcept { return last_increment_; }

private:
  double last_increment_;
};

class DivergenceError : public SolverError {
public:
  using SolverError::SolverError;
};

/// A checked invariant (energy balance, orthogonality, ledger schema) failed.
class InvariantError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace vmsns
