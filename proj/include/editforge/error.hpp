#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace editforge {

enum class ErrorKind {
  io,
  format,
  unsupported,
  empty_input,
  parameter,
  dependency,
  external_process,
  not_synthesizable,
  capacity,
  too_short,
  shape,
  label,
  configuration,
  empty_corpus,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::dependency: return "dependency";
    case ErrorKind::external_process: return "external_process";
    case ErrorKind::not_synthesizable: return "not_synthesizable";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::too_short: return "too_short";
    case ErrorKind::shape: return "shape";
    case ErrorKind::label: return "label";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::empty_corpus: return "empty_corpus";
  }
  return "unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace editforge
