#pragma once

#include <stdexcept>
#include <string>

namespace nonauto {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition (bad degree, bad window, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A plain double evaluation left the finite range; retry with scaled arithmetic.
class MagnitudeOverflow : public Error {
 public:
  using Error::Error;
};

/// A numeric search or check could not reach a conclusion.
class CheckFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nonauto
