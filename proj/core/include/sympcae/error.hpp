#pragma once

#include <stdexcept>
#include <string>

namespace sympcae {

// Exceptions carry a category so the CLI can map failures onto exit codes.
enum class ErrorKind { Shape, Config, Numeric, Io, State };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Shape, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, long index = -1)
      : Error(ErrorKind::Numeric, what), index_(index) {}
  // Offending index (entry, epoch or step) when one is known, otherwise -1.
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

// Raised when an object is used before a required preparation step
// (for example an unfrozen pooling layer).
class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorKind::State, what) {}
};

}  // namespace sympcae
