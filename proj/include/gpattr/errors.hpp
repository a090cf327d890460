#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpattr {

// Bad input, bad hyperparameters or an out-of-regime query. CLI exit code 2.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct dimension_error : config_error {
  dimension_error(std::size_t expected, std::size_t got)
      : config_error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                     std::to_string(got)) {}
};

// Adapter failure: timeout, broken pipe, malformed response. CLI exit code 3.
struct transport_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite model output inside an objective.
struct numeric_error : std::runtime_error {
  numeric_error(const std::string& what, std::size_t sample)
      : std::runtime_error(what + " (sample " + std::to_string(sample) + ")"), sample_index(sample) {}
  std::size_t sample_index;
};

}  // namespace gpattr
