#pragma once

#include <stdexcept>
#include <string>

namespace tsattack {

/// Invalid system, constraint, dataset or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller
/// (wrong lengths, non-symmetric input, solving on an infeasible solution).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical failure or an oracle check that did not pass.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system or parse failure on external data; message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsattack
