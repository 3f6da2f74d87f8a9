#pragma once

#include <stdexcept>
#include <string>

namespace nrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request exceeds a configured ceiling (sieve range, factorization bound, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// lo >= hi, or an index below its minimum.
class InvalidRange : public Error {
 public:
  using Error::Error;
};

/// Exact integer result does not fit the integer width.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class UnknownConstant : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

/// I/O failure in the run store (disk, permissions, malformed files).
class StoreError : public Error {
 public:
  using Error::Error;
};

class CheckpointVersionError : public StoreError {
 public:
  using StoreError::StoreError;
};

/// Invalid run configuration; field() names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("invalid config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace nrl
