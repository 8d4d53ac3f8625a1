#pragma once

#include <stdexcept>
#include <string>

namespace hsunmix {

/// Bad user input: malformed files, invalid options, shape mismatches.
/// The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown during a run (NaN/Inf in factors). Exit code 1.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& msg, int iteration)
      : std::runtime_error(msg), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

}  // namespace hsunmix
