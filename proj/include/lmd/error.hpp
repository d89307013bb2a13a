#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmd {

// Base for every error raised by the library. The CLI maps ConfigError to
// exit status 1 (usage) and everything else to exit status 2 (data).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters or flag values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when one applies.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(what + " at line " + std::to_string(line)), line_(line) {}
  explicit FormatError(const std::string& what) : Error(what) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Token absent from an embedding vocabulary.
class OovError : public Error {
 public:
  explicit OovError(const std::string& token)
      : Error("out-of-vocabulary token '" + token + "'"), token_(token) {}

  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

// Shape disagreement between matrices, vectors or spaces.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Zero-norm vector where a direction is required.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

// Too few usable rows/pairs for an operation.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmd
