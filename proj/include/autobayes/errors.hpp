#pragma once

#include <stdexcept>
#include <string>

namespace autobayes {

// Base of every error raised by the engine. Callers that only need to
// distinguish "domain failure" from everything else catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spaces on either side of a composition do not agree.
class BoundaryMismatch : public Error {
 public:
  using Error::Error;
};

// An operation that requires a normalized measure received one that is not.
class NotNormalized : public Error {
 public:
  using Error::Error;
};

// Inversion queried at an observation outside the pushforward support.
class OutOfSupport : public Error {
 public:
  using Error::Error;
};

// Loss evaluation hit inf - inf.
class IndeterminateLoss : public Error {
 public:
  using Error::Error;
};

// Malformed weights, unknown factors, cycles and other invalid inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Finite-difference stencil or training loop produced a non-finite value.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class Diverged : public Error {
 public:
  using Error::Error;
};

}  // namespace autobayes
