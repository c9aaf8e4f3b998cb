#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace surfcomp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-side contract was violated (bad argument, out-of-range prompt, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Geometry that admits no meaningful result (zero extent, all-degenerate faces).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `location` is a 1-based line for text formats and
/// a byte offset for binary payloads.
class ParseError : public Error {
 public:
  enum class Unit { kLine, kByteOffset };

  ParseError(const std::string& what, std::size_t location, Unit unit)
      : Error(what + (unit == Unit::kLine ? " (line " : " (offset ") +
              std::to_string(location) + ")"),
        location_(location),
        unit_(unit) {}

  std::size_t location() const noexcept { return location_; }
  Unit unit() const noexcept { return unit_; }

 private:
  std::size_t location_;
  Unit unit_;
};

/// A file uses a feature outside the supported subset (big-endian PLY, ...).
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

/// A prompt selected no pixels (landed on background / ground).
class EmptyRegionError : public Error {
 public:
  using Error::Error;
};

/// External model provider failures.
class ProviderError : public Error {
 public:
  using Error::Error;
  virtual bool retriable() const noexcept { return false; }
};

class ProviderTimeoutError : public ProviderError {
 public:
  using ProviderError::ProviderError;
  bool retriable() const noexcept override { return true; }
};

class ProviderProtocolError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

}  // namespace surfcomp
