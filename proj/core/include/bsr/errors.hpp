#pragma once

#include <stdexcept>
#include <string>

namespace bsr {

// Error categories map one-to-one onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or command line input. Exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed, or geometrically inconsistent data. Exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Solver failure: singular systems, no usable boosting rounds. Exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsr
