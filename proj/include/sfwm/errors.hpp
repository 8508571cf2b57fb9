#pragma once

#include <stdexcept>
#include <string>

namespace sfwm {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class ArgumentOutOfRange : public Error {
 public:
  using Error::Error;
};

class WavelengthOutOfRange : public Error {
 public:
  using Error::Error;
};

class ModeNotGuided : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class AmbiguousAssignment : public Error {
 public:
  using Error::Error;
};

class NoAssignment : public Error {
 public:
  using Error::Error;
};

class EmptySelection : public Error {
 public:
  using Error::Error;
};

class UnknownProcessLabel : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfwm
