#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace despeckle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its admissible range (non-positive looks, empty grid, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain of a mapping (negative intensity, non-invertible input).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Image or patch dimensions are incompatible.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Input has no spread (constant sample, zero variance).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class InsufficientGroupError : public Error {
 public:
  using Error::Error;
};

class EmptyAggregationError : public Error {
 public:
  using Error::Error;
};

/// Raised by the raster and text readers; carries the byte offset of the failure when known.
class IoError : public Error {
 public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  explicit IoError(const std::string& what, std::size_t offset = kNoOffset)
      : Error(offset == kNoOffset ? what : what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace despeckle
