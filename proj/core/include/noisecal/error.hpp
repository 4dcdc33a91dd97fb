#pragma once

#include <stdexcept>
#include <string>

namespace noisecal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, violated preconditions, numerical failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable/unwritable files and malformed CSV.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace noisecal
