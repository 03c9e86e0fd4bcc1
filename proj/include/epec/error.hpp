#pragma once

#include <stdexcept>
#include <string>

namespace epec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (scenario config, CSV, model file).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input that parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File content that does not have the expected columns or layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace epec
