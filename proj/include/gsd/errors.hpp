#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsd {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported file content (PLY header, JSON schema, PNG).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A value violates a domain invariant. `index()` names the offending
/// element when there is one.
class ValidationError : public Error {
 public:
  static constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

  explicit ValidationError(const std::string& what, std::size_t index = kNoIndex)
      : Error(index == kNoIndex ? what : what + " (index " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class EmptyCloudError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsd
