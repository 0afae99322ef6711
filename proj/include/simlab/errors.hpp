#pragma once

#include <stdexcept>
#include <string>

namespace simlab {

// Invalid model data (bad probability rows, dimension mismatches, ...).
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violation of the reset-to-observed-states session contract.
struct protocol_error : std::runtime_error {
  explicit protocol_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad experiment or parameter configuration.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An algorithm exceeded an explicit iteration or core-set budget.
struct budget_error : std::runtime_error {
  explicit budget_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An algorithm reached a state it cannot recover from (e.g. an empty
// candidate set after elimination).
struct algorithm_error : std::runtime_error {
  explicit algorithm_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace simlab
