#pragma once

#include <stdexcept>
#include <string>

namespace fhr {

// Base class for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input values outside the documented domain (landmark off-grid, bad parameter range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Mismatched dimensions between containers that must be aligned.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Heatmap contains NaN or cannot be sampled.
class InvalidHeatmapError : public Error {
 public:
  using Error::Error;
};

// Not enough frames or sequences to compute the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Prior moments requested before any frame has been absorbed.
class NoPriorError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, truncation, schema violations).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid command-line or config-file input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fhr
