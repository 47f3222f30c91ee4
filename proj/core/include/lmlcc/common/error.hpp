#pragma once

#include <stdexcept>
#include <string>

namespace lmlcc {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (header key, CSV row, binary record).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Value outside its documented domain (rating out of 1..5, bad spacing).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

/// Data payload length disagrees with the declared geometry.
class SizeMismatchError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, training or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (NaN or Inf observed).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmlcc
