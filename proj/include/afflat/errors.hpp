#pragma once

#include <stdexcept>
#include <string>

namespace afflat {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration: wrong dimensions, missing values.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Argument lies outside the domain where the map is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Singular or ill-conditioned input.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A point-count or search budget would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (e.g. a transform that should be unimodular is not).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace afflat
