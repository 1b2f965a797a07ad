#pragma once

#include <stdexcept>
#include <string>

namespace tcmbench {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or configuration that fails a documented contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Missing or unusable configuration (unset credential, bad URL, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A remote call failed after retries; carries the last HTTP status (0 when
/// no response was received at all).
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// A remote answered, but not in the expected wire shape.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcmbench
