#pragma once

#include <stdexcept>
#include <string>

namespace lsm {

// Every failure raised by the library derives from Error so callers can catch
// one type; the subclasses name the contract that was broken.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

// A protocol node touches factors held by more than one party.
class LocalityViolation : public Error {
  public:
    using Error::Error;
};

// Teleportation resource pair is not a maximally entangled pure state.
class ResourceInvalid : public Error {
  public:
    using Error::Error;
};

// A composer was handed a protocol that does not solve its own task.
class CompositionInvalid : public Error {
  public:
    using Error::Error;
};

class NotProductSet : public Error {
  public:
    using Error::Error;
};

// Two remaining candidates that the Bell-tensor discriminator cannot separate.
class UnsupportedPair : public Error {
  public:
    using Error::Error;
};

}  // namespace lsm
