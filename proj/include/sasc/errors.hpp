#pragma once

#include <stdexcept>
#include <string>

namespace sasc {

// Bad caller input: out-of-range parameters, non-finite values, malformed enums.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The data itself is unusable: unknown ids, broken files, degenerate inputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReferentialIntegrityError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedLacunarity : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateRegressor : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

// An encoder or decoder backing a metric failed.
class MetricUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rating service: judgment for an unknown or no-longer-pending comparison id.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ServiceUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sasc
