#pragma once

#include <stdexcept>
#include <string>

namespace hdc {

// Coarse failure categories. The CLI maps each one to its own exit code.
enum class ErrorKind {
  InvalidArgument,
  InvalidDimension,
  InvalidConfiguration,
  InvalidRecord,
  Io,
  Parse,
  UnknownLabel,
  CorruptModel,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::InvalidDimension: return "invalid dimension";
    case ErrorKind::InvalidConfiguration: return "invalid configuration";
    case ErrorKind::InvalidRecord: return "invalid record";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::UnknownLabel: return "unknown label";
    case ErrorKind::CorruptModel: return "corrupt model";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hdc
