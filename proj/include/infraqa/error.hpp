#pragma once

#include <stdexcept>
#include <string>

namespace infraqa {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant or contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A required input (file, setup binding) is absent.
class MissingInputError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace infraqa
