#pragma once

#include <stdexcept>
#include <string>

namespace phrasemt {

// Base for all library failures so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/parameter dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input outside the operation's domain (empty sequence, zero norm, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents; message carries the line number when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// File system / serialization failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Optimizer or training-loop failure (non-finite values etc).
class TrainError : public Error {
 public:
  using Error::Error;
};

}  // namespace phrasemt
