#pragma once

#include <stdexcept>
#include <string>

namespace diesel {

// Bad user-facing configuration (scenario / experiment / CLI input).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violation of the synchronous round contract (missing or duplicate
// neighbor broadcast within one round).
class SyncFault : public std::runtime_error {
 public:
  explicit SyncFault(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values encountered inside an iterative method.
class NumericalFault : public std::runtime_error {
 public:
  NumericalFault(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_ = -1;
};

// Kalman filter produced a non-finite mean or covariance.
class FilterDivergence : public std::runtime_error {
 public:
  explicit FilterDivergence(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace diesel
