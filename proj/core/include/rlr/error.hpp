#pragma once

#include <stdexcept>
#include <string>

namespace rlr {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A formula, declaration or configuration is inconsistent with its schema.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A configured resource bound (e.g. candidate count) was exceeded.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Input files could not be read or failed validation.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace rlr
