#pragma once

#include <stdexcept>
#include <string>

namespace entail {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not line up.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid argument to an operation (empty input, bad range, ...).
struct ArgumentError : Error {
  using Error::Error;
};

// Malformed or inconsistent input data (bad record, out-of-range token index).
struct DataError : Error {
  using Error::Error;
};

// Filesystem-level failures.
struct IoError : Error {
  using Error::Error;
};

// Checkpoint file is corrupt or truncated.
struct IntegrityError : Error {
  using Error::Error;
};

// Checkpoint was written by an incompatible format version.
struct VersionError : Error {
  using Error::Error;
};

// Non-finite value encountered where a finite one is required.
struct NumericError : Error {
  using Error::Error;
};

// Training loop hit a non-recoverable state (non-finite loss).
struct TrainingAbort : Error {
  using Error::Error;
};

}  // namespace entail
