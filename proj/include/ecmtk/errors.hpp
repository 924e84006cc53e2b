#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecmtk {

// Invalid arguments or preconditions violated by the caller.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A structurally invalid model configuration (tables, specs, meshes).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or a numerical routine that cannot proceed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampling interval too coarse for the requested square wave.
class AliasingError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Least-squares problems that are rank deficient or fail to initialize.
class FitError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Linear systems that cannot be solved as posed (e.g. no reference potential).
class SetupError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

}  // namespace ecmtk
