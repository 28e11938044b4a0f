#pragma once

#include <stdexcept>
#include <string>

namespace fairforest {

// Error taxonomy, mirrored by the CLI exit codes:
//   std::invalid_argument  -> usage / argument errors        (exit 2)
//   DataError and children -> data, schema and model errors  (exit 3)
// std::domain_error is used for mathematically undefined requests
// (moments of an empty view, discrimination with an empty group).

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ModelError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace fairforest
