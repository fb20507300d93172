#pragma once

#include <stdexcept>
#include <string>

namespace stcomp {

/// Invalid configuration or parameter value (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite inputs, failed factorizations, eigensolver failures.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Graph does not satisfy a structural precondition.
class TopologyError : public std::runtime_error {
 public:
  explicit TopologyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterate left the admissible region (norm blow-up or NaN).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, long round)
      : std::runtime_error(msg), round_(round) {}
  long round() const { return round_; }

 private:
  long round_;
};

}  // namespace stcomp
