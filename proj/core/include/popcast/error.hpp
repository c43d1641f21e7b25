#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace popcast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (bad index, value out of range).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Engine calls issued in an order the online protocol does not allow.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Input data that is well-formed text but semantically inconsistent.
// The CLI maps this (and ParseError) to exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace popcast
