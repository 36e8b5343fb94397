#pragma once

#include <stdexcept>
#include <string>

namespace grid {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NodeMismatch : public Error {
 public:
  using Error::Error;
};

class ConstraintConflict : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

class NotIntervenable : public Error {
 public:
  using Error::Error;
};

class SingularSubmatrix : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class PriorUnavailable : public Error {
 public:
  using Error::Error;
};

class SchemaViolation : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure talking to a prior provider; retried by query_prior.
class TransportError : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class SpacingViolation : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace grid
