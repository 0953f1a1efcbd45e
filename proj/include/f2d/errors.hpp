#pragma once

#include <stdexcept>
#include <string>

namespace f2d {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry / numeric errors.

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

// Fusion / metric errors.

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class AllInvalid : public Error {
 public:
  using Error::Error;
};

class NoGroundTruth : public Error {
 public:
  using Error::Error;
};

// Synthetic-scene errors.

class EmptyScene : public Error {
 public:
  using Error::Error;
};

// File-format errors.

class BadMagic : public Error {
 public:
  using Error::Error;
};

class TruncatedFile : public Error {
 public:
  using Error::Error;
};

class DimensionOverflow : public Error {
 public:
  using Error::Error;
};

class UnknownExtension : public Error {
 public:
  using Error::Error;
};

class BadHeader : public Error {
 public:
  using Error::Error;
};

class BadLine : public Error {
 public:
  BadLine(const std::string& what, int line_no)
      : Error(what + " (line " + std::to_string(line_no) + ")"), line_no(line_no) {}
  int line_no;
};

class NonRigidRotation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace f2d
