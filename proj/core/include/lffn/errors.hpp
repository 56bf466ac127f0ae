#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lffn {

// Base error carrying a machine-parsable code and the CLI exit code
// (0 ok, 2 config error, 3 data error, 4 numeric error).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what, int exit_code)
      : std::runtime_error(what), code_(std::move(code)), exit_code_(exit_code) {}

  const std::string& code() const { return code_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string code_;
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what, 2) {}
};

// Shape/axis mismatches between tensors or between tensors and parameters.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what, 2) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error("data", what, 3) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error("parse", file + ":" + std::to_string(line) + ": " + what, 3) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error("index", what, 3) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what, 4) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric", what, 4) {}
};

}  // namespace lffn
