#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sfwm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value is missing, malformed or violates an invariant.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("field '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A precondition on an operation argument does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Correlation normalization is undefined (a singles count is zero).
class EmptyCurveError : public Error {
 public:
  using Error::Error;
};

/// The zero-delay auto-correlation bin has no coincidences.
class EmptyAutoBinError : public Error {
 public:
  using Error::Error;
};

/// A time-tag file is malformed; offset() is the byte offset of the first bad record.
class FormatError : public Error {
 public:
  FormatError(std::uint64_t offset, const std::string& what)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfwm
