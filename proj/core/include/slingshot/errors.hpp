#pragma once

#include <stdexcept>
#include <string>

namespace slingshot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed level pack, configuration or checkpoint document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value that violates a documented invariant or precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An operation was requested in a game state that does not allow it.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Learner weights became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The posterior precision matrix could not be factorized.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace slingshot
