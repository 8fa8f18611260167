#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgattr {

// Process exit codes shared by every subcommand.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,      // bad flags, invalid config, validation failures
  kData = 2,       // inconsistent or missing data
  kTransport = 3,  // model endpoint unreachable or misbehaving
};

constexpr int to_int(ExitCode c) noexcept { return static_cast<int>(c); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kData; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

// Malformed input record. `line` is 1-based; 0 when unknown.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kTransport; }
};

// Endpoint answered with a non-2xx status.
class EndpointError : public TransportError {
 public:
  EndpointError(int status, const std::string& what)
      : TransportError(what), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Endpoint answered 2xx but the body is not what we asked for.
class ProtocolError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace kgattr
