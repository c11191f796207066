#pragma once

#include <stdexcept>
#include <string>

namespace purets {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible operand shapes; the message names both shapes.
struct ShapeError : Error {
  using Error::Error;
};

// NaN/Inf produced where a finite value is required.
struct NumericError : Error {
  using Error::Error;
};

// Malformed input text (CSV cell, registry entry, config value).
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid data that cannot support the requested operation
// (empty split, window longer than split, ...).
struct DataError : Error {
  using Error::Error;
};

// File system failures.
struct IoError : Error {
  using Error::Error;
};

// Invalid configuration or arguments; maps to CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Metric undefined on this input (constant truth, all channels skipped, ...).
struct DegenerateError : Error {
  using Error::Error;
};

// Operation requires a model family this model is not in.
struct UnsupportedModelError : Error {
  using Error::Error;
};

}  // namespace purets
