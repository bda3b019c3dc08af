#pragma once

#include <stdexcept>
#include <string>

namespace weldray {

// Malformed input documents (material, specimen, run configuration).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A query or parameter outside the physical domain, e.g. a source
// point that lies outside every specimen region.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace weldray
