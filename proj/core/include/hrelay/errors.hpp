#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hrelay {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Raised when a discretized operator stops being positive definite or when
// a refinement check disagrees with the base discretization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested integration range lies outside a tabulated support.
class SupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hrelay
