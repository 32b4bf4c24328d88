#pragma once

#include <stdexcept>
#include <string>

namespace vwgan {

// Shape or dimension mismatch between tensors / configs.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unsupported file contents (WAV, feature cache, checkpoint).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or unreadable input file.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value where one is not allowed (loss, gradient, update).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values outside of shape problems (bad thresholds, hops, ...).
struct ValueError : std::runtime_error {
  explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vwgan
