#pragma once

#include <stdexcept>
#include <string>

namespace claimgat {

// Shape/axis disagreements between tensors or graph structures.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid user-supplied configuration (rates, fractions, fold counts, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data; message carries the line number where known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A call violated an API precondition (non-scalar loss, missing grads, ...).
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace claimgat
