#pragma once

#include <stdexcept>
#include <string>

namespace ntrocr {

// Bad arguments, shapes, or file contents. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (PGM, manifest, config, checkpoint).
class ParseError : public ValidationError {
 public:
  explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

// Missing or unreadable/unwritable files. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ntrocr
