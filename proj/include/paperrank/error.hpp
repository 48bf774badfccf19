#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paperrank {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes. `location` is a 1-based line number for line
/// formats and a byte offset for XML.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

/// A value violates a domain invariant (duplicate id, bad category, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments to an operation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Missing, invalid or expired credentials.
class AuthError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace paperrank
