#pragma once

#include <stdexcept>

namespace rbflow {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };  // shape or dimension mismatch
struct ValueError : Error { using Error::Error; };      // argument outside its domain
struct ParseError : Error { using Error::Error; };      // malformed input text
struct ConfigError : Error { using Error::Error; };     // bad or missing configuration
struct IoError : Error { using Error::Error; };         // filesystem failure
struct NumericError : Error { using Error::Error; };    // non-finite value mid-computation

}  // namespace rbflow
